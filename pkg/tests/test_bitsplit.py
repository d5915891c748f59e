from hypothesis import given, settings
from hypothesis import strategies as st

from actsim.corpus import case
from actsim.difftest import check_seed
from actsim.engine import Engine, run_script
from actsim.opt.bitsplit import analyze_bit_usage, bit_split, split_nodes
from actsim.pipeline import PipelineConfig, build
from actsim.randgen import GenParams, random_circuit

from helpers import load_text, traces

SLICES = """circuit S :
  module S :
    input a : UInt<8>
    input b : UInt<8>
    input c : UInt<8>
    output f : UInt<8>
    output g : UInt<8>
    node D = cat(a, b)
    node E = cat(D, c)
    node F = not(bits(E, 23, 16))
    node G = not(bits(E, 7, 0))
    f <= F
    g <= G
"""


def test_cat_consumed_by_slice_is_split():
    g = load_text(SLICES)
    lat = analyze_bit_usage(g)
    d, e = g.by_name("D").id, g.by_name("E").id
    assert lat.slices(d) == [(7, 0), (15, 8)]
    assert lat.slices(e) == [(7, 0), (15, 8), (23, 16)]


def test_arithmetic_mixes_all_bits():
    text = """circuit A :
  module A :
    input a : UInt<8>
    input b : UInt<8>
    output lo : UInt<4>
    output hi : UInt<5>
    node D = add(a, b)
    lo <= bits(D, 3, 0)
    hi <= bits(D, 8, 4)
"""
    g = load_text(text)
    lat = analyze_bit_usage(g)
    assert lat.slices(g.by_name("D").id) == [(8, 0)]
    assert lat.split_nodes() == []


def test_slice_consumer_depends_only_on_its_slice():
    g = load_text(SLICES)
    g2, rep = bit_split(g)
    assert rep.details["split_nodes"] == 2
    gnode = g2.by_name("G")
    preds = {g2[p].name for p in g2.preds()[gnode.id]}
    # G reads only the low slice of E, which in turn reads only c
    assert preds == {"E[7:0]"}
    low = g2.by_name("E[7:0]")
    assert {g2[p].name for p in g2.preds()[low.id]} == {"c"}


def test_single_slice_nodes_unchanged():
    text = """circuit U :
  module U :
    input a : UInt<8>
    output o : UInt<8>
    node D = not(a)
    o <= D
"""
    g = load_text(text)
    lat = analyze_bit_usage(g)
    assert lat.split_nodes() == []
    g2, rep = split_nodes(g, lat)
    assert len(g2) == len(g)
    assert rep.details["split_nodes"] == 0


def test_three_deep_cat_chain_split_end_to_end():
    text = """circuit T :
  module T :
    input a : UInt<4>
    input b : UInt<4>
    input c : UInt<4>
    input d : UInt<4>
    output o1 : UInt<4>
    output o2 : UInt<4>
    output o3 : UInt<4>
    output o4 : UInt<4>
    node X = cat(a, b)
    node Y = cat(X, c)
    node Z = cat(Y, d)
    o1 <= bits(Z, 15, 12)
    o2 <= bits(Z, 11, 8)
    o3 <= bits(Z, 7, 4)
    o4 <= bits(Z, 3, 0)
"""
    g = load_text(text)
    lat = analyze_bit_usage(g)
    names = {g[k].name for k in lat.split_nodes()}
    assert names == {"X", "Y", "Z"}
    g2, _ = split_nodes(g, lat)
    assert len(g2) == len(g) - 3 + 2 + 3 + 4
    script = "poke a 1\npoke b 2\npoke c 3\npoke d 4\nstep 1\npoke c 9\nstep 1"
    for cfg in (PipelineConfig(), PipelineConfig(bit_split=False)):
        a, o = traces(g, script, cfg)
        assert a.trace == o.trace == [(1, 2, 3, 4), (1, 2, 9, 4)]


def test_register_loop_split():
    text = """circuit R :
  module R :
    input clock : Clock
    input load : UInt<1>
    input x : UInt<4>
    output hi : UInt<4>
    output lo : UInt<4>
    reg r : UInt<8>, clock
    r <= mux(load, cat(x, bits(r, 3, 0)), cat(bits(r, 7, 4), x))
    hi <= bits(r, 7, 4)
    lo <= bits(r, 3, 0)
"""
    g = load_text(text)
    lat = analyze_bit_usage(g)
    assert lat.slices(g.by_name("r").id) == [(3, 0), (7, 4)]
    script = "poke x 5\npoke load 1\nstep 1\npoke x 7\npoke load 0\nstep 1\npoke x 2\nstep 1"
    a, o = traces(g, script)
    assert a.trace == o.trace


def test_complementary_slice_not_activated():
    g = case("statusword").load()
    script = "reset 1\npoke bin 0x3c\npoke cin 0x0f\npoke load 1\nstep 1\npoke load 0\nstep 1"
    counts = {}
    for bs in (True, False):
        b = build(g, PipelineConfig(max_supernode_size=1, bit_split=bs))
        e = Engine(b.program)
        run_script(e, script)
        sn = b.plan.node_to_sn[b.graph.by_name("g").id]
        before = e.counters.supernode_activations[sn]
        e.step(20)
        counts[bs] = e.counters.supernode_activations[sn] - before
    assert counts[True] == 0
    assert counts[False] > 0


def _reachable_supernodes(b, src: int) -> set[int]:
    prog = b.program
    masks, _ = prog.source_table[src]
    hit = {i for i in range(len(b.plan))
           for w, m in masks if i // prog.word_bits == w and m >> (i % prog.word_bits) & 1}
    todo = list(hit)
    while todo:
        sn = todo.pop()
        for nid in b.plan.members[sn]:
            for t in prog.activation_targets(nid):
                if t not in hit:
                    hit.add(t)
                    todo.append(t)
    return hit


def test_activation_lists_exclude_complementary_consumer():
    g = load_text(SLICES)
    for bs, expect_reached in ((True, False), (False, True)):
        b = build(g, PipelineConfig(max_supernode_size=1, inline=False, bit_split=bs))
        g_sn = b.plan.node_to_sn[b.graph.by_name("G").id]
        reached = _reachable_supernodes(b, b.graph.by_name("a").id)
        assert (g_sn in reached) is expect_reached


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_slices_partition_each_node(seed):
    g = load_text(random_circuit(seed, GenParams(nodes=60)))
    lat = analyze_bit_usage(g)
    for nid in lat.widths:
        sl = lat.slices(nid)
        assert sl[0][1] == 0
        assert sl[-1][0] == lat.widths[nid] - 1
        for (h1, _), (_, l2) in zip(sl, sl[1:]):
            assert l2 == h1 + 1


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_bit_split_alone_preserves_traces(seed):
    cfg = PipelineConfig(simplify=False, eliminate=False, inline=False, reset_opt=False)
    assert check_seed(seed, 40, {"bit-split-only": cfg}, GenParams(nodes=60)) == []
