"""Inline-versus-extract decisions for intermediate nodes."""

from __future__ import annotations

from dataclasses import dataclass

from ..ir.evaluate import DEFAULT_OP_WEIGHTS, expr_cost
from ..ir.expr import MEM_OPS, Expr, contains_op, count_refs, refs, substitute
from ..ir.graph import NodeKind, RtlGraph
from .report import PassReport

# CPython's parser refuses deeply nested parentheses, and generated code
# nests one level per operator, so inlined expressions stay below this depth.
MAX_INLINE_DEPTH = 48


@dataclass
class CostParams:
    cost_node: int = 2
    activation_branchless_threshold: int = 8
    word_bits: int = 64

    def __post_init__(self):
        if self.cost_node < 1:
            raise ValueError("cost_node must be at least 1")
        if self.activation_branchless_threshold < 0:
            raise ValueError("activation_branchless_threshold must be non-negative")


def should_extract(cost: int, uses: int, cost_node: int) -> bool:
    """Keep the node when duplicating it would cost more than materializing it."""
    return cost * uses > cost + cost_node


def depth(e: Expr) -> int:
    best = 0
    stack = [(e, 1)]
    while stack:
        x, d = stack.pop()
        if d > best:
            best = d
        for a in x.args:
            stack.append((a, d + 1))
    return best


def use_counts(g: RtlGraph) -> dict[int, int]:
    counts: dict[int, int] = {}
    for n in g.nodes.values():
        if n.expr is not None:
            count_refs(n.expr, counts)
    return counts


def decide_inline(g: RtlGraph, p: CostParams | None = None) -> tuple[RtlGraph, PassReport]:
    p = p or CostParams()
    g = g.copy()
    report = PassReport("inline", nodes_before=len(g))
    reset_signals = {n.reset.signal.node for n in g.nodes.values()
                     if n.reset is not None and n.reset.signal.op == "ref"}
    succs = {k: set(v) for k, v in g.succs().items()}
    counts = use_counts(g)
    probe_users: dict[int, set[str]] = {}
    for k, q in g.probes.items():
        for r in refs(q):
            probe_users.setdefault(r, set()).add(k)
    inlined, extracted = [], []
    for nid in g.topo_order():
        n = g[nid]
        if n.kind is not NodeKind.WIRE or nid in reset_signals or contains_op(n.expr, MEM_OPS):
            continue
        uses = counts.get(nid, 0)
        if uses == 0:
            continue
        cost = expr_cost(n.expr, DEFAULT_OP_WEIGHTS, p.word_bits)
        if should_extract(cost, uses, p.cost_node):
            extracted.append(n.name)
            continue
        consumers = sorted(succs[nid])
        new = {c: substitute(g[c].expr, {nid: n.expr}) for c in consumers}
        if any(depth(e) > MAX_INLINE_DEPTH for e in new.values()):
            extracted.append(n.name)
            continue
        for c, e in new.items():
            cn = g[c]
            cn.expr = e
            if cn.reset is not None:
                cn.reset.init = substitute(cn.reset.init, {nid: n.expr})
        new_refs = refs(n.expr)
        for k in probe_users.pop(nid, ()):
            g.probes[k] = substitute(g.probes[k], {nid: n.expr})
            for r in new_refs:
                probe_users.setdefault(r, set()).add(k)
        # the inlined node's own uses now count toward its sources
        for r, k in _ref_counts(n.expr).items():
            counts[r] = counts.get(r, 0) + k * (uses - 1)
        for r in new_refs:
            succs[r].discard(nid)
            succs[r].update(consumers)
        g.remove([nid])
        inlined.append(n.name)
    report.nodes_after = len(g)
    report.details = {"inlined": len(inlined), "extracted": len(extracted),
                      "cost_node": p.cost_node, "extracted_nodes": extracted}
    return g, report


def _ref_counts(e: Expr) -> dict[int, int]:
    out: dict[int, int] = {}
    count_refs(e, out)
    return out


def total_static_cost(g: RtlGraph, p: CostParams) -> int:
    """Sum of expression costs plus ``cost_node`` per materialized wire."""
    total = 0
    for n in g.nodes.values():
        if n.expr is not None:
            total += expr_cost(n.expr, DEFAULT_OP_WEIGHTS, p.word_bits)
        if n.kind is NodeKind.WIRE:
            total += p.cost_node
    return total
