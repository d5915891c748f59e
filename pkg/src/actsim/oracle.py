"""Naive reference simulator: every node, every cycle, in topological order."""

from __future__ import annotations

from dataclasses import dataclass, field

from .ir.codegen import RUNTIME, Hoister, Namer, to_python
from .ir.evaluate import compile_expr
from .ir.expr import mask
from .ir.graph import NodeKind, RtlGraph


class SimError(Exception):
    """Bad poke/peek requests and other run-time misuse."""


@dataclass
class OracleState:
    values: dict[int, int]
    mems: dict[int, list[int]]
    cycle: int = 0
    settled: bool = False
    evaluations: int = 0
    trace: list = field(default_factory=list)


def mem_write_layout(g: RtlGraph, nid: int) -> tuple[int, int, int]:
    """Return ``(mem id, addr width, data width)`` for a memory write node."""
    e = g[nid].expr
    _, addr, data = e.args
    return e.params[0], addr.width, data.width


def _straight_line(g: RtlGraph, order: list[int]):
    """One function assigning every node in ``order``; no activity tracking."""
    names = Namer(lambda k: f"env[{k}]", lambda m: f"mem[{m}]")
    lines = ["def _eval_all(env, mem):"]
    for n in order:
        h = Hoister()
        src = to_python(g[n].expr, names, h)
        lines += h.take()
        lines.append(f"    env[{n}] = {src}")
    lines.append("    return None")
    ns = dict(RUNTIME)
    exec("\n".join(lines), ns)
    return ns["_eval_all"]


class OracleSim:
    """Evaluates the whole graph each cycle; also the reference for traces.

    Reset information on register writes is honoured after the commit, so
    the oracle accepts both raw graphs (where the reset mux is still in the
    write expression) and graphs whose reset muxes were moved to a slow path.
    """

    def __init__(self, g: RtlGraph):
        self.g = g
        self._probe_fns: dict = {}
        self.order = [n for n in g.topo_order()
                      if g[n].kind not in (NodeKind.INPUT, NodeKind.REG_READ)]
        self._eval = _straight_line(g, self.order)
        self.regs = [(n.id, n.partner) for n in g.nodes.values()
                     if n.kind is NodeKind.REG_WRITE]
        self.resets = [(n.partner, compile_expr(n.reset.signal), compile_expr(n.reset.init))
                       for n in g.nodes.values()
                       if n.kind is NodeKind.REG_WRITE and n.reset is not None]
        self.mem_writes = []
        for m in g.mems.values():
            for w in m.writers:
                mid, aw, dw = mem_write_layout(g, w)
                self.mem_writes.append((w, mid, aw, dw, m.depth))
        self.inputs = {n.name: n.id for n in g.of_kind(NodeKind.INPUT)}
        self.state = OracleState({k: 0 for k in g.nodes},
                                 {m.id: [0] * m.depth for m in g.mems.values()})

    @property
    def cycle(self) -> int:
        return self.state.cycle

    @property
    def reset_inputs(self) -> list[str]:
        return self.g.reset_inputs

    def probes(self) -> dict:
        return self.g.probes

    def poke(self, name: str, value: int) -> None:
        if name not in self.inputs:
            raise SimError(f"cannot poke '{name}': not an input")
        nid = self.inputs[name]
        v = value & mask(self.g[nid].width)
        if self.state.values[nid] != v:
            self.state.values[nid] = v
            self.state.settled = False

    def _eval_all(self) -> None:
        self._eval(self.state.values, self.state.mems)
        self.state.evaluations += len(self.order)

    def step(self, n: int = 1) -> None:
        st = self.state
        vals, mems = st.values, st.mems
        for _ in range(n):
            if not st.settled:
                self._eval_all()
            inits = [(r, init(vals, mems)) for r, sig, init in self.resets if sig(vals, mems)]
            for w, r in self.regs:
                vals[r] = vals[w]
            for w, mid, aw, dw, depth in self.mem_writes:
                v = vals[w]
                if v >> (aw + dw):
                    addr = (v >> dw) & mask(aw)
                    if addr < depth:
                        mems[mid][addr] = v & mask(dw)
            for r, v in inits:
                vals[r] = v
            st.cycle += 1
            st.settled = False

    def settle(self) -> None:
        if not self.state.settled:
            self._eval_all()
            self.state.settled = True

    def peek_id(self, nid: int) -> int:
        self.settle()
        return self.state.values[nid]

    def _probe(self, name: str):
        fn = self._probe_fns.get(name)
        if fn is None:
            e = self.g.probes.get(name)
            if e is None:
                raise SimError(f"unknown signal '{name}'")
            fn = self._probe_fns[name] = compile_expr(e)
        return fn

    def peek(self, name: str) -> int:
        fn = self._probe(name)
        self.settle()
        return fn(self.state.values, self.state.mems)

    def sample(self, names: list[str]) -> tuple:
        fns = [self._probe(n) for n in names]
        self.settle()
        v, m = self.state.values, self.state.mems
        return tuple(f(v, m) for f in fns)


def oracle_step(g: RtlGraph, state: OracleState, pokes: dict[str, int]) -> OracleState:
    """Functional form: advance ``state`` by one cycle on graph ``g``."""
    sim = OracleSim(g)
    sim.state = state
    for k, v in pokes.items():
        sim.poke(k, v)
    sim.step()
    return sim.state
