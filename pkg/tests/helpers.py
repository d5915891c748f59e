"""Shared test utilities: a reference evaluator, random expressions, trace runners."""

from __future__ import annotations

import random

from actsim.engine import Engine, run_script
from actsim.frontend import load
from actsim.ir.expr import Expr, const, make, ref
from actsim.ir.graph import NodeKind, RtlGraph
from actsim.oracle import OracleSim
from actsim.partition import cut_size, evaluated_nodes
from actsim.pipeline import PipelineConfig, build


# reference semantics ----------------------------------------------------
# Deliberately written from the operator definitions: every operand is first
# turned into the integer it denotes, the exact result is computed with
# Python integers, and only then wrapped to the result width.

def _val(pattern: int, width: int, signed: bool) -> int:
    if signed and pattern >> (width - 1):
        return pattern - (1 << width)
    return pattern


def _wrap(v: int, width: int) -> int:
    return v % (1 << width)


def _tdiv(a: int, b: int) -> int:
    if b == 0:
        return 0
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def _trem(a: int, b: int) -> int:
    if b == 0:
        return 0
    return a - b * _tdiv(a, b)


def ref_eval(e: Expr, env: dict[int, int]) -> int:
    """Canonical bit pattern of ``e``; ``env`` maps node ids to bit patterns."""
    w = e.width
    if e.op == "const":
        return e.params[0]
    if e.op == "ref":
        return env[e.params[0]] % (1 << w)
    pats = [ref_eval(a, env) for a in e.args]
    vals = [_val(p, a.width, a.signed) for p, a in zip(pats, e.args)]
    op = e.op
    if op == "add":
        r = vals[0] + vals[1]
    elif op == "sub":
        r = vals[0] - vals[1]
    elif op == "mul":
        r = vals[0] * vals[1]
    elif op == "div":
        r = _tdiv(vals[0], vals[1])
    elif op == "rem":
        r = _trem(vals[0], vals[1])
    elif op in ("lt", "leq", "gt", "geq", "eq", "neq"):
        a, b = vals
        r = {"lt": a < b, "leq": a <= b, "gt": a > b, "geq": a >= b,
             "eq": a == b, "neq": a != b}[op]
    elif op == "pad":
        r = vals[0]
    elif op in ("asUInt", "asSInt"):
        r = pats[0]
    elif op == "cvt":
        r = vals[0]
    elif op == "shl":
        r = vals[0] * 2 ** e.params[0]
    elif op == "shr":
        n = e.params[0]
        r = vals[0] // 2 ** n if e.args[0].signed else pats[0] >> n
    elif op == "dshl":
        r = vals[0] * 2 ** pats[1]
    elif op == "dshr":
        r = vals[0] // 2 ** pats[1]
    elif op == "not":
        r = ~pats[0]
    elif op in ("and", "or", "xor"):
        a, b = (_wrap(v, w) for v in vals)
        r = {"and": a & b, "or": a | b, "xor": a ^ b}[op]
    elif op == "andr":
        r = pats[0] == (1 << e.args[0].width) - 1
    elif op == "orr":
        r = pats[0] != 0
    elif op == "xorr":
        r = bin(pats[0]).count("1") % 2
    elif op == "cat":
        r = pats[0] * 2 ** e.args[1].width + pats[1]
    elif op == "bits":
        hi, lo = e.params
        r = (pats[0] // 2 ** lo) % 2 ** (hi - lo + 1)
    elif op == "mux":
        r = vals[1] if pats[0] else vals[2]
    else:
        raise AssertionError(f"no reference for {op}")
    return _wrap(int(r), w)


# random expressions -----------------------------------------------------

BINARY = ["add", "sub", "mul", "div", "rem", "lt", "leq", "gt", "geq", "eq", "neq",
          "and", "or", "xor", "cat"]
UNARY = ["not", "andr", "orr", "xorr", "asUInt", "asSInt", "cvt", "neg_pad", "bits",
         "shl", "shr"]


class ExprGen:
    """Random well-typed expressions whose every node width is in [1, max_width]."""

    def __init__(self, rng: random.Random, n_leaves: int = 6, max_width: int = 130):
        self.rng = rng
        self.max_width = max_width
        self.leaves = []
        self.env = {}
        for i in range(n_leaves):
            w = self.width()
            s = rng.random() < 0.4
            self.leaves.append(ref(i, w, s))
            self.env[i] = self.value(w)

    def width(self) -> int:
        r = self.rng
        return r.choice([1, 2, 7, 8, 31, 32, 33, 63, 64, 65, 127, 128, 129, 130,
                         r.randint(1, self.max_width)])

    def value(self, w: int) -> int:
        r = self.rng
        return r.choice([0, 1, (1 << w) - 1, 1 << (w - 1), r.getrandbits(w)])

    def leaf(self) -> Expr:
        if self.rng.random() < 0.3:
            w = self.width()
            s = self.rng.random() < 0.4
            return const(self.value(w), w) if not s else Expr("const", (), (self.value(w),), w, True)
        return self.rng.choice(self.leaves)

    def fit(self, e: Expr) -> Expr:
        if e.width > self.max_width:
            lo = self.rng.randint(0, e.width - self.max_width)
            return make("bits", e, params=(lo + self.max_width - 1, lo))
        return e

    def same_sign(self, a: Expr, b: Expr) -> Expr:
        if a.signed == b.signed:
            return b
        return make("asSInt" if a.signed else "asUInt", b)

    def expr(self, depth: int) -> Expr:
        r = self.rng
        if depth == 0 or r.random() < 0.15:
            return self.leaf()
        kind = r.random()
        if kind < 0.5:
            op = r.choice(BINARY)
            a = self.expr(depth - 1)
            b = self.expr(depth - 1)
            if op in ("and", "or", "xor", "cat"):
                return self.fit(make(op, a, b))
            b = self.same_sign(a, b)
            return self.fit(make(op, a, b))
        if kind < 0.8:
            op = r.choice(UNARY)
            a = self.expr(depth - 1)
            if op == "neg_pad":
                return self.fit(make("pad", a, params=(r.randint(1, self.max_width),)))
            if op == "bits":
                lo = r.randint(0, a.width - 1)
                hi = r.randint(lo, a.width - 1)
                return make("bits", a, params=(hi, lo))
            if op in ("shl", "shr"):
                return self.fit(make(op, a, params=(r.randint(0, 70),)))
            return self.fit(make(op, a))
        if kind < 0.9:
            a = self.expr(depth - 1)
            amt = self.expr(depth - 1)
            if r.random() < 0.5:
                amt = make("bits", make("asUInt", amt), params=(min(2, amt.width - 1), 0))
                return self.fit(make("dshl", a, amt))
            amt = make("bits", make("asUInt", amt), params=(min(7, amt.width - 1), 0))
            return make("dshr", a, amt)
        c = self.expr(depth - 1)
        c = make("bits", make("asUInt", c), params=(0, 0))
        a = self.expr(depth - 1)
        b = self.same_sign(a, self.expr(depth - 1))
        return make("mux", c, a, b)


# simulation helpers -----------------------------------------------------

def load_text(text: str):
    g, _ = load(text, "<test>")
    return g


def outputs_of(g) -> list[str]:
    return [n.name for n in g.of_kind(NodeKind.OUTPUT)]


def traces(g, script, cfg: PipelineConfig | None = None):
    """Per-cycle output traces from the optimized engine and the oracle."""
    outs = outputs_of(g)
    eng = Engine(build(g, cfg or PipelineConfig()).program)
    a = run_script(eng, script, trace_signals=outs)
    b = run_script(OracleSim(g), script, trace_signals=outs)
    return a, b


COUNTER = """circuit Counter :
  module Counter :
    input clock : Clock
    input reset : UInt<1>
    input en : UInt<1>
    output count : UInt<8>

    reg r : UInt<8>, clock with :
      reset => (reset, UInt<8>(0))
    when en :
      r <= tail(add(r, UInt<8>(1)), 1)
    count <= r
"""

FREE_COUNTER = """circuit C :
  module C :
    input clock : Clock
    input reset : UInt<1>
    output count : UInt<8>

    reg r : UInt<8>, clock with :
      reset => (reset, UInt<8>(0))
    r <= tail(add(r, UInt<8>(1)), 1)
    count <= r
"""


# small partition graphs and a brute-force cut oracle ----------------------------

def graph(layout: list[tuple[str, list[str]]]) -> RtlGraph:
    """Wires in declaration order; a node with no listed predecessor reads an input."""
    g = RtlGraph()
    src = g.add("in", NodeKind.INPUT, 8).id
    ids = {}
    for name, preds in layout:
        args = [ref(ids[p], 8) for p in preds] or [ref(src, 8)]
        e = args[0]
        for a in args[1:]:
            e = make("xor", e, a)
        ids[name] = g.add(name, NodeKind.WIRE, 8, expr=e).id
    return g


def names_of(g, plan, nid_name):
    return plan.node_to_sn[g.by_name(nid_name).id]


def _set_partitions(items):
    if not items:
        yield []
        return
    head, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[head] + part[i]] + part[i + 1:]
        yield [[head]] + part


def acyclic(g, assign):
    edges = {(assign[u], assign[v]) for v, ps in g.preds().items() if v in assign
             for u in ps if u in assign and assign[u] != assign[v]}
    nodes = set(assign.values())
    indeg = {n: 0 for n in nodes}
    for _, b in edges:
        indeg[b] += 1
    ready = [n for n in nodes if indeg[n] == 0]
    seen = 0
    while ready:
        n = ready.pop()
        seen += 1
        for a, b in edges:
            if a == n:
                indeg[b] -= 1
                if indeg[b] == 0:
                    ready.append(b)
    return seen == len(nodes)


def brute_force_min_cut(g, max_size):
    nodes = evaluated_nodes(g)
    best = None
    for part in _set_partitions(nodes):
        if any(len(p) > max_size for p in part):
            continue
        assign = {n: i for i, p in enumerate(part) for n in p}
        if not acyclic(g, assign):
            continue
        c = cut_size(g, assign)
        best = c if best is None else min(best, c)
    return best


def two_cliques():
    layout = []
    for c in "ab":
        for i in range(4):
            layout.append((f"{c}{i}", [f"{c}{j}" for j in range(i)]))
    # bridge from the first clique's source to the second clique's sink
    layout[7] = ("b3", ["b0", "b1", "b2", "a0"])
    return graph(layout)


def hanging_pair_graph():
    # x hangs off a 3-clique by three edges and feeds y by one edge
    return graph([
        ("p0", []), ("p1", ["p0"]), ("p2", ["p0", "p1"]),
        ("x", ["p0", "p1", "p2"]),
        ("q0", []), ("q1", ["q0"]), ("q2", ["q0", "q1"]),
        ("y", ["x", "q0", "q1", "q2"]),
    ])
