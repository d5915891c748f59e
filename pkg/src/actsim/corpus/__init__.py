"""Checked-in designs with testbenches and expected metric bounds.

Each case lives in ``corpus/<name>/`` as ``design.fir``, ``test.tb`` and
``bounds.json``.  :func:`run_corpus` runs every case on the optimized engine
and on the oracle, compares the per-cycle output traces and checks the
measured activity factor and post-optimization node count against the
bounds.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..engine import Engine, parse_script, report_metrics, run_script
from ..frontend import load
from ..ir.graph import NodeKind, RtlGraph
from ..oracle import OracleSim
from ..pipeline import PipelineConfig, build

CORPUS_DIR = Path(__file__).parent


@dataclass
class CorpusCase:
    name: str
    design: Path
    testbench: Path
    af_range: tuple[float, float]
    node_range: tuple[int, int]
    description: str = ""

    def load(self) -> RtlGraph:
        g, _ = load(self.design.read_text(), str(self.design))
        return g

    def script(self):
        return parse_script(self.testbench.read_text())


@dataclass
class CaseResult:
    case: str
    config: str
    passed: bool
    af: float = 0.0
    node_count: int = 0
    cycles: int = 0
    problems: list[str] = field(default_factory=list)


def cases() -> list[CorpusCase]:
    out = []
    for d in sorted(p for p in CORPUS_DIR.iterdir() if (p / "design.fir").exists()):
        b = json.loads((d / "bounds.json").read_text())
        out.append(CorpusCase(d.name, d / "design.fir", d / "test.tb",
                              tuple(b["af"]), tuple(b["node_count"]), b.get("description", "")))
    return out


def case(name: str) -> CorpusCase:
    for c in cases():
        if c.name == name:
            return c
    raise KeyError(name)


def first_divergence(a: list, b: list, signals: list[str]) -> str | None:
    for cyc, (x, y) in enumerate(zip(a, b), 1):
        if x != y:
            for s, u, v in zip(signals, x, y):
                if u != v:
                    return f"cycle {cyc}: {s} optimized={u} oracle={v}"
    if len(a) != len(b):
        return f"trace lengths differ: {len(a)} vs {len(b)}"
    return None


def run_case(c: CorpusCase, cfg: PipelineConfig | None = None, label: str = "default",
             check_bounds: bool = True, g: RtlGraph | None = None,
             oracle_trace: list | None = None) -> CaseResult:
    cfg = cfg or PipelineConfig()
    g = g or c.load()
    script = c.script()
    outputs = [n.name for n in g.of_kind(NodeKind.OUTPUT)]
    res = CaseResult(c.name, label, True)

    eng = Engine(build(g, cfg).program)
    r = run_script(eng, script, trace_signals=outputs)
    if not r.passed:
        res.problems.append(f"optimized: {r.failure}")
    if oracle_trace is None:
        o = run_script(OracleSim(g), script, trace_signals=outputs)
        if not o.passed:
            res.problems.append(f"oracle: {o.failure}")
        oracle_trace = o.trace
    div = first_divergence(r.trace, oracle_trace, outputs)
    if div:
        res.problems.append(f"divergence at {div}")

    m = report_metrics(eng)
    res.af, res.node_count, res.cycles = m["af_mean"], m["node_count"], m["cycles"]
    if check_bounds:
        lo, hi = c.af_range
        if not lo <= res.af <= hi:
            res.problems.append(f"af {res.af:.4f} outside [{lo}, {hi}]")
        lo, hi = c.node_range
        if not lo <= res.node_count <= hi:
            res.problems.append(f"node count {res.node_count} outside [{lo}, {hi}]")
    res.passed = not res.problems
    return res


def run_corpus(names: list[str] | None = None,
               configs: dict[str, PipelineConfig] | None = None) -> list[CaseResult]:
    """Run the selected cases (all by default) under each configuration.

    Bounds are only checked for the default all-passes configuration since
    disabling passes legitimately changes node count and activity.
    """
    configs = configs or {"default": PipelineConfig()}
    out = []
    for c in cases():
        if names is not None and c.name not in names:
            continue
        g = c.load()
        outputs = [n.name for n in g.of_kind(NodeKind.OUTPUT)]
        o = run_script(OracleSim(g), c.script(), trace_signals=outputs)
        for label, cfg in configs.items():
            res = run_case(c, cfg, label, label == "default", g, o.trace)
            if not o.passed:
                res.problems.insert(0, f"oracle: {o.failure}")
                res.passed = False
            out.append(res)
    return out


def format_table(results: list[CaseResult]) -> str:
    rows = [f"{'case':12s} {'config':14s} {'result':6s} {'af':>7s} {'nodes':>6s} {'cycles':>7s}"]
    for r in results:
        rows.append(f"{r.case:12s} {r.config:14s} {'pass' if r.passed else 'FAIL':6s} "
                    f"{r.af:7.4f} {r.node_count:6d} {r.cycles:7d}")
        rows += [f"    {p}" for p in r.problems]
    return "\n".join(rows)
