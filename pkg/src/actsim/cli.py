"""Command line: ``actsim run`` and ``actsim bench``."""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import replace

from .engine import Engine, ScriptError, parse_script, report_metrics, run_script
from .engine.vcd import VcdRecorder
from .frontend import FirrtlError, load
from .ir.graph import CycleError, NodeKind, RtlGraph
from .metrics import OverheadModel, RunSample, calibrate, rank_agreement
from .oracle import OracleSim, SimError
from .pipeline import PASSES, PipelineConfig, build

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Timed:
    """Wraps a simulator and accumulates wall time spent inside ``step``."""

    def __init__(self, sim):
        self.sim = sim
        self.seconds = 0.0

    def step(self, n: int = 1) -> None:
        t = time.perf_counter()
        self.sim.step(n)
        self.seconds += time.perf_counter() - t

    def __getattr__(self, name):
        return getattr(self.sim, name)


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("design", help="FIRRTL input file")
    common.add_argument("--tb", required=True, help="testbench script")
    common.add_argument("--engine", choices=["optimized", "oracle"], default="optimized")
    common.add_argument("--max-supernode-size", type=int, default=35)
    for p in PASSES:
        common.add_argument(f"--no-{p.replace('_', '-')}", action="store_true",
                            help=f"disable the {p.replace('_', '-')} pass")
    common.add_argument("--no-opt", action="store_true",
                        help="disable every pass and evaluate every node every cycle")
    common.add_argument("--cost-node", type=int, default=2)
    common.add_argument("--branchless-threshold", type=int, default=8)
    common.add_argument("--vcd", help="write a value change dump")
    common.add_argument("--metrics", help="write activity metrics as JSON")
    common.add_argument("--report", help="write pass and partition reports as JSON")
    common.add_argument("--seed", type=int, default=0)

    ap = argparse.ArgumentParser(prog="actsim", description="Activity-driven RTL simulator")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="simulate a design under a testbench")
    b = sub.add_parser("bench", parents=[common], help="measure simulation speed")
    b.add_argument("--compare-engines", action="store_true")
    b.add_argument("--sweep-supernode-size", help="comma-separated sizes, e.g. 5,10,20")
    b.add_argument("--cycles", type=int, default=0,
                   help="extra free-running cycles after the script")
    b.add_argument("--repeat", type=int, default=1, help="best-of repetitions per measurement")
    return ap


def config_from_args(args) -> PipelineConfig:
    if args.no_opt:
        cfg = PipelineConfig.no_opt()
    else:
        cfg = PipelineConfig(**{p: not getattr(args, f"no_{p}") for p in PASSES})
    return replace(cfg, input=args.design, testbench=args.tb, engine=args.engine,
                   max_supernode_size=args.max_supernode_size, cost_node=args.cost_node,
                   activation_branchless_threshold=args.branchless_threshold,
                   vcd=args.vcd, metrics=args.metrics, report=args.report, seed=args.seed)


def _load(path: str) -> RtlGraph:
    with open(path) as f:
        text = f.read()
    g, diags = load(text, path)
    for d in diags:
        print(d, file=sys.stderr)
    return g


def make_sim(g: RtlGraph, cfg: PipelineConfig, cache: dict | None = None):
    """Returns ``(simulator, build or None)`` for the configured engine."""
    if cfg.engine == "oracle":
        return OracleSim(g), None
    b = build(g, cfg, cache)
    return Engine(b.program), b


def oracle_metrics(sim: OracleSim) -> dict:
    n = len(sim.order)
    cycles = sim.cycle
    evals = sim.state.evaluations
    return {"cycles": cycles, "af_mean": 1.0 if n else 0.0, "evaluated_nodes": evals,
            "activations": 0, "examinations": 0, "supernodes": 0, "node_count": n}


def _metrics_of(sim) -> dict:
    if isinstance(sim, OracleSim):
        return oracle_metrics(sim)
    return report_metrics(sim)


def _sample(g: RtlGraph, cfg: PipelineConfig, script, extra_cycles: int = 0,
            cache: dict | None = None) -> tuple[RunSample, dict]:
    sim, _ = make_sim(g, cfg, cache)
    timed = _Timed(sim)
    run_script(timed, script)
    if extra_cycles:
        timed.step(extra_cycles)
    m = _metrics_of(sim)
    return RunSample.from_metrics(m, timed.seconds), m


def _model_block(g: RtlGraph, cfg: PipelineConfig, script, sample: RunSample) -> dict:
    """Calibrate on this design under three partitionings, then predict ``cfg``."""
    cache: dict = {}
    samples = [sample]
    for variant in (replace(cfg, engine="optimized", full_eval=True),
                    replace(cfg, engine="optimized", max_supernode_size=1),
                    replace(cfg, engine="optimized",
                            max_supernode_size=max(2, cfg.max_supernode_size * 4))):
        samples.append(_sample(g, variant, script, cache=cache)[0])
    usable = [s for s in samples if s.cycles and s.node_count]
    try:
        model = calibrate(usable)
    except RuntimeError:
        return OverheadModel().to_dict()
    return model.with_run(sample).to_dict()


def _write_json(path: str, data: dict) -> None:
    with open(path, "w") as f:
        json.dump(data, f, indent=2, sort_keys=False)
        f.write("\n")


def cmd_run(args, cfg: PipelineConfig) -> int:
    g = _load(cfg.input)
    with open(cfg.testbench) as f:
        script = parse_script(f.read())
    sim, b = make_sim(g, cfg)
    timed = _Timed(sim)
    recorder = None
    vcd_file = None
    if cfg.vcd:
        vcd_file = open(cfg.vcd, "w")
        recorder = VcdRecorder(sim, vcd_file, g.name)
    try:
        result = run_script(timed, script, recorder)
    finally:
        if recorder is not None:
            recorder.close()
            vcd_file.close()
    if result.failure is not None:
        print(f"FAIL: {result.failure}")
    else:
        print(f"PASS: {result.expects} expect(s), {result.cycles} cycle(s)")
    if cfg.metrics and sim.cycle:
        m = _metrics_of(sim)
        sample = RunSample.from_metrics(m, timed.seconds)
        keep = ("cycles", "af_mean", "evaluated_nodes", "activations", "examinations",
                "supernodes", "node_count", "reset_checks", "active_histogram",
                "supernode_activations")
        out = {k: m[k] for k in keep if k in m}
        out["step_seconds"] = timed.seconds
        out["config"] = cfg.to_dict()
        out["model"] = _model_block(g, cfg, script, sample)
        _write_json(cfg.metrics, out)
    if cfg.report:
        rep = b.report_dict() if b is not None else {"passes": [], "engine": "oracle"}
        rep["config"] = cfg.to_dict()
        _write_json(cfg.report, rep)
    return EXIT_OK if result.passed else EXIT_FAIL


def _trace(sim, script, outputs: list[str]) -> tuple[list, float, int]:
    timed = _Timed(sim)
    res = run_script(timed, script, trace_signals=outputs)
    return res.trace, timed.seconds, sim.cycle


def bench_breakdown(g: RtlGraph, cfg: PipelineConfig, script, extra_cycles: int = 0,
                    repeat: int = 1) -> list[dict]:
    """Cycles/sec with optimizations enabled incrementally."""
    node_level = {"simplify": True, "eliminate": True, "inline": True, "reset_opt": True}
    off = {p: False for p in PASSES}
    stages = [
        ("baseline", PipelineConfig.no_opt()),
        ("+supernode", PipelineConfig(**{**off, "pre_group": True, "kernighan": True})),
        ("+node-level", PipelineConfig(**{**off, "pre_group": True, "kernighan": True,
                                          **node_level})),
        ("+bit-split", PipelineConfig()),
    ]
    cache: dict = {}
    out = []
    base = None
    for name, stage in stages:
        stage = replace(stage, max_supernode_size=cfg.max_supernode_size,
                        cost_node=cfg.cost_node)
        best = None
        for _ in range(max(1, repeat)):
            s, m = _sample(g, stage, script, extra_cycles, cache)
            if best is None or s.seconds < best[0].seconds:
                best = (s, m)
        s, m = best
        cps = s.cycles / s.seconds if s.seconds > 0 else math.inf
        base = base or cps
        out.append({"stage": name, "cycles": s.cycles, "seconds": s.seconds,
                    "cycles_per_sec": cps, "af_mean": m["af_mean"],
                    "log10_speedup": math.log10(cps / base) if base else 0.0})
    return out


def bench_sweep(g: RtlGraph, cfg: PipelineConfig, script, sizes: list[int],
                extra_cycles: int = 0, repeat: int = 1) -> dict:
    """Measure each size, best of ``repeat``.

    Repetitions are interleaved across sizes so slow drift in machine load
    hits every size alike; sizes that yield an identical plan share one
    measurement.
    """
    cache: dict = {}
    first_of: dict[int, int] = {}
    seen: dict = {}
    for i, size in enumerate(sizes):
        key = i
        if cfg.engine == "optimized":
            plan = build(g, replace(cfg, max_supernode_size=size), cache).plan
            key = tuple(map(tuple, plan.members))
        first_of[i] = seen.setdefault(key, i)
    distinct = sorted(set(first_of.values()))
    best: dict[int, tuple] = {}
    for _ in range(max(1, repeat)):
        for i in distinct:
            s, m = _sample(g, replace(cfg, max_supernode_size=sizes[i]), script,
                           extra_cycles, cache)
            if i not in best or s.seconds < best[i][0].seconds:
                best[i] = (s, m)
    rows, samples = [], []
    for i, size in enumerate(sizes):
        s, m = best[first_of[i]]
        samples.append(s)
        row = {"max_supernode_size": size, "cycles": s.cycles, "seconds": s.seconds,
               "cycles_per_sec": s.cycles / s.seconds if s.seconds > 0 else math.inf,
               "af_mean": m["af_mean"], "supernodes": m["supernodes"]}
        if first_of[i] != i:
            row["same_plan_as"] = sizes[first_of[i]]
        rows.append(row)
    out = {"engine": cfg.engine, "sweep": rows}
    if cfg.engine == "optimized" and len(samples) >= 2:
        model = calibrate(samples)
        for row, s in zip(rows, samples):
            row["predicted_T"] = model.with_run(s).to_dict()["predicted_T"]
        out["model"] = {"E": model.E, "A_succ": model.A_succ, "A_exam": model.A_exam,
                        "best_agrees": rank_agreement(samples, model)}
    return out


def cmd_bench(args, cfg: PipelineConfig) -> int:
    g = _load(cfg.input)
    with open(cfg.testbench) as f:
        script = parse_script(f.read())
    record: dict = {"config": cfg.to_dict()}
    ok = True
    if args.compare_engines:
        outputs = [n.name for n in g.of_kind(NodeKind.OUTPUT)]
        rows = {}
        traces = {}
        for engine in ("optimized", "oracle"):
            c = replace(cfg, engine=engine)
            t0 = time.perf_counter()
            sim, _ = make_sim(g, c)
            t1 = time.perf_counter()
            tr, secs, cycles = _trace(sim, script, outputs)
            traces[engine] = tr
            rows[engine] = {"compile_seconds": t1 - t0, "seconds": secs, "cycles": cycles,
                            "cycles_per_sec": cycles / secs if secs > 0 else math.inf}
            print(f"{engine:9s}  {secs:9.4f} s  {rows[engine]['cycles_per_sec']:12.1f} cycles/s")
        equal = traces["optimized"] == traces["oracle"]
        print(f"traces {'identical' if equal else 'DIFFER'}")
        record["compare_engines"] = {**rows, "traces_equal": equal}
        ok = equal
    if args.sweep_supernode_size:
        try:
            sizes = [int(x) for x in args.sweep_supernode_size.split(",") if x.strip()]
        except ValueError:
            raise SystemExit(f"actsim: bad size list {args.sweep_supernode_size!r}") from None
        sweep = bench_sweep(g, cfg, script, sizes, args.cycles, args.repeat)
        for row in sweep["sweep"]:
            print(f"size {row['max_supernode_size']:4d}  {row['cycles_per_sec']:12.1f} cycles/s")
        record["sweep"] = sweep
    if not args.compare_engines and not args.sweep_supernode_size:
        stages = bench_breakdown(g, cfg, script, args.cycles, args.repeat)
        for row in stages:
            print(f"{row['stage']:12s} {row['cycles_per_sec']:12.1f} cycles/s  "
                  f"log10 x{row['log10_speedup']:+.3f}")
        record["breakdown"] = stages
    if cfg.metrics:
        _write_json(cfg.metrics, record)
    if cfg.report:
        _write_json(cfg.report, record)
    return EXIT_OK if ok else EXIT_FAIL


def main(argv: list[str] | None = None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        cfg = config_from_args(args)
        if args.command == "run":
            return cmd_run(args, cfg)
        return cmd_bench(args, cfg)
    except (FirrtlError, ScriptError, CycleError, SimError, ValueError, OSError) as e:
        print(f"actsim: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
