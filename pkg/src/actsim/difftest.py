"""Differential testing of the optimized engine against the oracle on random circuits."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .engine import Engine
from .frontend import load
from .ir.graph import NodeKind, RtlGraph
from .oracle import OracleSim
from .pipeline import PASSES, PipelineConfig, build
from .randgen import GenParams, random_circuit, random_stimulus


def standard_configs() -> dict[str, PipelineConfig]:
    """All passes on, each pass off in turn, and no optimization at all."""
    cfgs = {"all": PipelineConfig()}
    cfgs.update({f"no-{p}": PipelineConfig().without(p) for p in PASSES})
    cfgs["no-opt"] = PipelineConfig.no_opt()
    return cfgs


def drive(sim, outputs: list[str], stim: list[dict[str, int]]) -> list[tuple]:
    """Apply each cycle's pokes, sample the outputs, then clock once."""
    trace = []
    for pokes in stim:
        for k, v in pokes.items():
            sim.poke(k, v)
        trace.append(sim.sample(outputs))
        sim.step()
    return trace


@dataclass
class Mismatch:
    seed: int
    config: str
    cycle: int
    signal: str
    engine: int
    oracle: int

    def __str__(self) -> str:
        return (f"seed {self.seed} [{self.config}] cycle {self.cycle}: {self.signal} "
                f"engine={self.engine} oracle={self.oracle}")


MIN_NODES, MAX_NODES = 50, 500


def default_size(seed: int) -> int:
    """Node count for a seed: anywhere in 50-500, skewed toward small designs."""
    u = random.Random(seed).random()
    return MIN_NODES + int((MAX_NODES - MIN_NODES) * u ** 3)


def random_case(seed: int, cycles: int, params: GenParams | None = None
                ) -> tuple[RtlGraph, list[str], list[dict[str, int]]]:
    if params is None:
        params = GenParams(nodes=default_size(seed))
    g, _ = load(random_circuit(seed, params), f"<seed {seed}>")
    ins = {n.name: n.width for n in g.of_kind(NodeKind.INPUT) if n.name != "clock"}
    outs = [n.name for n in g.of_kind(NodeKind.OUTPUT)]
    return g, outs, random_stimulus(seed, ins, cycles, g.reset_inputs)


def check_seed(seed: int, cycles: int, configs: dict[str, PipelineConfig] | None = None,
               params: GenParams | None = None) -> list[Mismatch]:
    """First divergence (if any) per configuration for one random circuit."""
    configs = configs or standard_configs()
    g, outs, stim = random_case(seed, cycles, params)
    ref = drive(OracleSim(g), outs, stim)
    cache: dict = {}
    found = []
    for name, cfg in configs.items():
        tr = drive(Engine(build(g, cfg, cache).program), outs, stim)
        if tr == ref:
            continue
        cyc = next(i for i in range(len(tr)) if tr[i] != ref[i])
        j = next(k for k in range(len(outs)) if tr[cyc][k] != ref[cyc][k])
        found.append(Mismatch(seed, name, cyc, outs[j], tr[cyc][j], ref[cyc][j]))
    return found
