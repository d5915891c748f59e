import json

import pytest

from actsim.corpus import CORPUS_DIR, case, cases, first_divergence, run_case, run_corpus
from actsim.difftest import standard_configs
from actsim.pipeline import PipelineConfig, build

EXPECTED = {"alu", "arbiter", "core5", "counter", "gated64", "reset100", "shiftreg",
            "statusword"}


def test_layout():
    assert {c.name for c in cases()} == EXPECTED
    for c in cases():
        d = CORPUS_DIR / c.name
        assert {p.name for p in d.iterdir()} >= {"design.fir", "test.tb", "bounds.json"}
        b = json.loads((d / "bounds.json").read_text())
        lo, hi = b["af"]
        assert 0 <= lo <= hi <= 1
        lo, hi = b["node_count"]
        assert 0 < lo <= hi
        assert c.description


def test_unknown_case():
    with pytest.raises(KeyError):
        case("nope")


def test_default_corpus_passes():
    results = run_corpus()
    bad = [r for r in results if not r.passed]
    assert not bad, bad
    assert len(results) == len(EXPECTED)
    assert all(0 <= r.af <= 1 for r in results)


@pytest.mark.slow
def test_corpus_passes_under_every_pass_toggle():
    results = run_corpus(configs=standard_configs())
    bad = [(r.case, r.config, r.problems) for r in results if not r.passed]
    assert not bad


def test_low_activity_design():
    r = run_case(case("gated64"))
    assert r.passed
    assert r.af < 0.05


def test_arbiter_rewrite_fires():
    b = build(case("arbiter").load(), PipelineConfig())
    fired = sum(r.details.get("one_hot_rewrites", 0) for r in b.reports if r.name == "simplify")
    assert fired >= 1
    assert run_case(case("arbiter")).passed


def test_core5_size():
    c = case("core5")
    assert len(c.load()) >= 200
    r = run_case(c)
    assert c.node_range[0] <= r.node_count <= c.node_range[1]


def test_results_are_deterministic():
    a = run_corpus(["core5", "statusword"])
    b = run_corpus(["core5", "statusword"])
    assert [(r.case, r.af, r.node_count, r.cycles) for r in a] == \
        [(r.case, r.af, r.node_count, r.cycles) for r in b]


def test_bounds_violation_is_reported():
    c = case("counter")
    tight = type(c)(c.name, c.design, c.testbench, (0.0, 0.01), c.node_range)
    r = run_case(tight)
    assert not r.passed and "outside" in r.problems[0]


def test_first_divergence():
    assert first_divergence([(1, 2)], [(1, 2)], ["a", "b"]) is None
    assert first_divergence([(1, 2), (1, 3)], [(1, 2), (1, 4)], ["a", "b"]) == \
        "cycle 2: b optimized=3 oracle=4"
    assert "lengths" in first_divergence([(1,)], [], ["a"])
