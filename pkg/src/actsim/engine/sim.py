"""Run-time state and the stepping API around a compiled program."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..ir.evaluate import compile_expr
from ..ir.expr import mask
from ..ir.graph import NodeKind
from ..oracle import SimError
from .program import SimProgram


@dataclass
class MetricCounters:
    cycles: int = 0
    evaluated_nodes: int = 0      # E proxy
    activations: int = 0          # A_succ proxy
    examinations: int = 0         # A_exam proxy
    reset_checks: int = 0
    settle_evaluations: int = 0
    settle_examinations: int = 0
    # cycles by number of distinct nodes evaluated in them (settles count
    # toward the cycle they precede)
    active_hist: dict[int, int] = field(default_factory=dict)
    supernode_activations: list[int] = field(default_factory=list)

    def active_per_cycle_mean(self) -> float:
        return self.evaluated_nodes / self.cycles if self.cycles else 0.0


@dataclass
class SimState:
    values: list[int]
    mems: dict[int, list[int]]
    active: list[int]
    pending: list[int]
    cycle: int = 0
    counters: MetricCounters = field(default_factory=MetricCounters)


class Engine:
    """Activity-driven simulator executing a :class:`SimProgram`."""

    def __init__(self, prog: SimProgram):
        self.prog = prog
        g = prog.graph
        self.n_nodes = prog.eval_count
        size = max(g.nodes, default=-1) + 1
        active = [0] * prog.n_words
        for b in prog.blocks:
            active[b.word] |= 1 << b.bit
        self.state = SimState([0] * size, {m.id: [0] * m.depth for m in g.mems.values()},
                              active, [])
        c = self.state.counters
        c.supernode_activations = [0] * len(prog.blocks)
        self._zero = [0] * prog.n_words
        self._seen = [0] * prog.n_words
        self.inputs = {n.name: n.id for n in g.of_kind(NodeKind.INPUT)}
        self.widths = {n.id: n.width for n in g.nodes.values()}
        self._probe_fns: dict[str, object] = {}
        self._settled = False
        self._carry = 0

    @property
    def cycle(self) -> int:
        return self.state.cycle

    @property
    def counters(self) -> MetricCounters:
        return self.state.counters

    def poke(self, name: str, value: int) -> None:
        nid = self.inputs.get(name)
        if nid is None:
            raise SimError(f"cannot poke '{name}': not an input")
        v = value & mask(self.widths[nid])
        st = self.state
        if st.values[nid] != v:
            st.values[nid] = v
            tab, k = self.prog.source_table[nid]
            for i, m in tab:
                st.active[i] |= m
            st.counters.activations += k
            self._settled = False

    def _run(self, ncyc: int, settle: bool) -> None:
        st = self.state
        c = st.counters
        ev, ex, na, rc = self.prog.run(ncyc, settle, self._settled, self._carry, st.values, st.mems, st.active, st.pending,
                                       c.supernode_activations, c.active_hist,
                                       self.prog.reg_table, self.prog.mem_table, self._zero,
                                       self._seen)
        c.activations += na
        n_words = 0 if self.prog.full_eval else self.prog.n_words
        c.evaluated_nodes += ev
        if settle:
            # distinct nodes evaluated by settles since the last step
            self._carry = (self.prog.overlap(self._seen, self._seen)
                           if not self.prog.full_eval else self.n_nodes)
            c.settle_evaluations += ev
            c.examinations += ex + n_words
        else:
            self._carry = 0
            c.examinations += ex + ncyc * n_words
            c.reset_checks += rc
            c.cycles += ncyc
            st.cycle += ncyc

    def step(self, n: int = 1) -> None:
        if n < 0:
            raise SimError("step count must be non-negative")
        if n:
            self._run(n, False)
            self._settled = False

    def settle(self) -> None:
        """Bring combinational values up to date without advancing the clock."""
        if not self._settled:
            self._run(1, True)
            self._settled = True

    @property
    def reset_inputs(self) -> list[str]:
        return self.prog.graph.reset_inputs

    def probes(self) -> dict:
        return self.prog.graph.probes

    def peek(self, name: str) -> int:
        fn = self._probe_fns.get(name)
        if fn is None:
            e = self.prog.graph.probes.get(name)
            if e is None:
                raise SimError(f"unknown signal '{name}'")
            fn = self._probe_fns[name] = compile_expr(e)
        self.settle()
        return fn(self.state.values, self.state.mems)

    def peek_id(self, nid: int) -> int:
        self.settle()
        return self.state.values[nid]

    def sample(self, names: list[str]) -> tuple:
        """Settled values of several signals at once."""
        fns = self._probe_fns
        self.settle()
        v, m = self.state.values, self.state.mems
        try:
            return tuple([fns[n](v, m) for n in names])
        except KeyError:
            return tuple([self.peek(n) for n in names])


def report_metrics(engine: Engine) -> dict:
    """Activity summary; requires at least one executed cycle."""
    c = engine.counters
    if c.cycles == 0:
        raise SimError("no cycles executed")
    n = engine.n_nodes
    active = sum(k * v for k, v in c.active_hist.items())
    af = active / (c.cycles * n) if n else 0.0
    return {
        "cycles": c.cycles,
        "af_mean": af,
        "evaluated_nodes": c.evaluated_nodes,
        "activations": c.activations,
        "examinations": c.examinations,
        "reset_checks": c.reset_checks,
        "supernodes": engine.prog.n_supernodes,
        "node_count": n,
        "settle_evaluations": c.settle_evaluations,
        "active_histogram": {str(k): c.active_hist[k] for k in sorted(c.active_hist)},
        "supernode_activations": list(c.supernode_activations),
    }
