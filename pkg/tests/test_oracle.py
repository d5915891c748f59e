import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from actsim.difftest import default_size, random_case
from actsim.engine import run_script
from actsim.frontend import load
from actsim.ir.graph import NodeKind
from actsim.oracle import OracleSim, OracleState, SimError, oracle_step
from actsim.randgen import GenParams, random_circuit, random_stimulus

from helpers import COUNTER, FREE_COUNTER, load_text


def test_counter_after_three_steps():
    sim = OracleSim(load_text(COUNTER))
    sim.poke("en", 1)
    sim.step(3)
    assert sim.peek("count") == 3


def test_reset_restores_init_values():
    sim = OracleSim(load_text(COUNTER))
    sim.poke("en", 1)
    sim.step(7)
    sim.poke("reset", 1)
    sim.step()
    assert sim.peek("count") == 0
    sim.poke("reset", 0)
    sim.step()
    assert sim.peek("count") == 1


def test_free_counter_wraps():
    sim = OracleSim(load_text(FREE_COUNTER))
    for c in range(1, 600):
        sim.step()
        assert sim.peek("count") == c % 256


LFSR = """circuit L :
  module L :
    input clock : Clock
    input reset : UInt<1>
    output q : UInt<16>
    reg s : UInt<16>, clock with :
      reset => (reset, UInt<16>(44257))
    node fb = xor(xor(bits(s, 0, 0), bits(s, 2, 2)), xor(bits(s, 3, 3), bits(s, 5, 5)))
    s <= cat(fb, bits(s, 15, 1))
    q <= s
"""


def test_lfsr_matches_python_model():
    sim = OracleSim(load_text(LFSR))
    sim.poke("reset", 1)
    sim.step()
    sim.poke("reset", 0)
    s = 0xACE1
    for _ in range(200):
        assert sim.peek("q") == s
        bit = (s ^ (s >> 2) ^ (s >> 3) ^ (s >> 5)) & 1
        s = (s >> 1) | (bit << 15)
        sim.step()


MEM = """circuit M :
  module M :
    input clock : Clock
    input we : UInt<1>
    input wa : UInt<2>
    input wd : UInt<8>
    input ra : UInt<2>
    output rd : UInt<8>
    mem m :
      data-type => UInt<8>
      depth => 4
      read-latency => 0
      write-latency => 1
      reader => r
      writer => w
    m.r.addr <= ra
    m.r.en <= UInt<1>(1)
    m.r.clk <= clock
    m.w.addr <= wa
    m.w.en <= we
    m.w.clk <= clock
    m.w.data <= wd
    m.w.mask <= UInt<1>(1)
    rd <= m.r.data
"""


def test_memory_write_then_read():
    sim = OracleSim(load_text(MEM))
    script = ("poke we 1\npoke wa 2\npoke wd 77\npoke ra 2\nexpect rd 0\nstep 1\n"
              "expect rd 77\npoke wa 1\npoke wd 5\npoke we 0\nstep 1\npoke ra 1\nexpect rd 0")
    res = run_script(sim, script)
    assert res.passed, res.failure


def test_unknown_signals():
    sim = OracleSim(load_text(COUNTER))
    with pytest.raises(SimError):
        sim.peek("missing")
    with pytest.raises(SimError):
        sim.poke("count", 1)


def test_functional_step_matches_object():
    g = load_text(COUNTER)
    sim = OracleSim(g)
    st_ = OracleSim(g).state
    for pokes in ({"en": 1}, {}, {"en": 0}, {"en": 1}):
        for k, v in pokes.items():
            sim.poke(k, v)
        sim.step()
        st_ = oracle_step(g, st_, pokes)
        assert isinstance(st_, OracleState)
        assert st_.cycle == sim.cycle
    r = g.by_name("count").id
    sim.settle()
    assert oracle_step(g, st_, {}).cycle == 5
    assert sim.peek_id(r) == 3


# random circuits -----------------------------------------------------------------

def test_seed_one_parses():
    g, _ = load(random_circuit(1, GenParams(nodes=50)), "<rand>")
    assert len(g) > 50


def test_same_seed_same_text():
    assert random_circuit(1, nodes=50) == random_circuit(1, nodes=50)
    assert random_circuit(1, nodes=50) != random_circuit(2, nodes=50)
    ins = {"a": 8, "rst": 1}
    assert random_stimulus(3, ins, 20, ["rst"]) == random_stimulus(3, ins, 20, ["rst"])


def test_bad_params_rejected():
    with pytest.raises(ValueError):
        GenParams(nodes=0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 31), st.integers(5, 150), st.integers(1, 130))
def test_frontend_accepts_generated_circuits(seed, nodes, width):
    text = random_circuit(seed, GenParams(nodes=nodes, max_width=width))
    g, _ = load(text, "<rand>")
    sim = OracleSim(g)
    sim.step(3)
    for name in g.probes:
        assert sim.peek(name) >= 0


@given(st.integers(0, 2 ** 31))
def test_default_sizes_stay_in_range(seed):
    assert 50 <= default_size(seed) <= 500


def test_default_cases_cover_sizes_and_widths():
    sizes = [default_size(s) for s in range(500)]
    assert min(sizes) < 60 and max(sizes) > 450
    widths = set()
    for seed in range(5):
        g, _, _ = random_case(seed, 1)
        widths |= {n.width for n in g.of_kind(NodeKind.INPUT, NodeKind.REG_READ)
                   if n.name != "clock"}
    assert min(widths) == 1 and max(widths) == 65
