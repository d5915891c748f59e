"""Pass pipeline: raw graph to compiled program, with per-pass toggles."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

from .engine.program import SimProgram, compile_program
from .ir.graph import RtlGraph
from .opt.activation import choose_activation_strategy
from .opt.bitsplit import bit_split
from .opt.inline import CostParams, decide_inline
from .opt.redundant import eliminate_redundant
from .opt.report import PassReport
from .opt.reset import ResetGroup, build_reset_groups
from .opt.simplify import simplify_expressions
from .partition import DEFAULT_MAX_SIZE, SupernodePlan, build_plan

PASSES = ("simplify", "eliminate", "inline", "reset_opt", "bit_split", "pre_group", "kernighan")


@dataclass
class PipelineConfig:
    input: str | None = None
    testbench: str | None = None
    engine: str = "optimized"
    max_supernode_size: int = DEFAULT_MAX_SIZE
    simplify: bool = True
    eliminate: bool = True
    inline: bool = True
    reset_opt: bool = True
    bit_split: bool = True
    pre_group: bool = True
    kernighan: bool = True
    full_eval: bool = False
    cost_node: int = 2
    activation_branchless_threshold: int = 8
    max_slices: int = 8
    vcd: str | None = None
    metrics: str | None = None
    report: str | None = None
    seed: int = 0

    def __post_init__(self):
        if self.engine not in ("optimized", "oracle"):
            raise ValueError(f"unknown engine {self.engine!r}")
        if self.max_supernode_size < 1:
            raise ValueError("max_supernode_size must be at least 1")
        self.cost_params()

    @classmethod
    def no_opt(cls, **kw) -> "PipelineConfig":
        off = {p: False for p in PASSES}
        off.update(kw)
        return cls(full_eval=True, **off)

    def without(self, name: str) -> "PipelineConfig":
        if name not in PASSES:
            raise ValueError(f"unknown pass {name!r}")
        d = asdict(self)
        d[name] = False
        return PipelineConfig(**d)

    def cost_params(self) -> CostParams:
        return CostParams(self.cost_node, self.activation_branchless_threshold)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Build:
    graph: RtlGraph
    plan: SupernodePlan
    groups: list[ResetGroup]
    strategies: dict
    program: SimProgram
    reports: list[PassReport] = field(default_factory=list)
    opt_seconds: float = 0.0
    compile_seconds: float = 0.0

    def report_dict(self) -> dict:
        return {"passes": [r.to_dict() for r in self.reports],
                "partition": self.plan.summary(self.graph),
                "opt_seconds": self.opt_seconds,
                "compile_seconds": self.compile_seconds}


def _steps(cfg: PipelineConfig) -> list[str]:
    steps = []
    if cfg.simplify:
        steps.append("simplify")
    if cfg.eliminate:
        steps.append("eliminate")
    if cfg.inline:
        steps.append("inline")
        if cfg.simplify:
            steps.append("simplify")
    if cfg.bit_split:
        steps.append("bit_split")
        if cfg.simplify:
            steps.append("simplify")
        if cfg.eliminate:
            steps.append("eliminate")
    if cfg.reset_opt:
        steps.append("reset_opt")
    return steps


def optimize(g: RtlGraph, cfg: PipelineConfig, cache: dict | None = None
             ) -> tuple[RtlGraph, list[ResetGroup], list[PassReport]]:
    """Run the enabled passes in order.

    ``cache`` may be shared between calls on the same input graph; results
    are keyed by the sequence of steps already applied, so configurations
    with a common prefix of passes reuse it.
    """
    cache = {} if cache is None else cache
    groups: list[ResetGroup] = []
    reports: list[PassReport] = []
    key: tuple = (cfg.cost_node, cfg.activation_branchless_threshold, cfg.max_slices)
    for step in _steps(cfg):
        key = key + (step,)
        hit = cache.get(key)
        if hit is None:
            if step == "simplify":
                out = simplify_expressions(g) + ([],)
            elif step == "eliminate":
                out = eliminate_redundant(g) + ([],)
            elif step == "inline":
                out = decide_inline(g, cfg.cost_params()) + ([],)
            elif step == "bit_split":
                out = bit_split(g, cfg.max_slices) + ([],)
            else:
                grp, g2, rep = build_reset_groups(g)
                out = (g2, rep, grp)
            hit = cache[key] = out
        g, rep, grp = hit
        reports.append(rep)
        groups = grp
    return g, groups, reports


def build(g: RtlGraph, cfg: PipelineConfig, cache: dict | None = None) -> Build:
    """Optimize, partition and compile ``g`` (which is not modified)."""
    t0 = time.perf_counter()
    g2, groups, reports = optimize(g, cfg, cache)
    plan = build_plan(g2, cfg.max_supernode_size, cfg.pre_group, cfg.kernighan)
    strategies = choose_activation_strategy(g2, cfg.cost_params())
    t1 = time.perf_counter()
    prog = compile_program(g2, plan, groups, strategies, full_eval=cfg.full_eval)
    t2 = time.perf_counter()
    return Build(g2, plan, groups, strategies, prog, reports, t1 - t0, t2 - t1)
