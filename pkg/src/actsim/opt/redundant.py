"""Removal of alias, dead, shorted and unused-register nodes."""

from __future__ import annotations

from ..ir.expr import Expr, extend, refs, substitute, transform, walk
from ..ir.graph import NodeKind, RtlGraph
from .report import PassReport

_PROBE_SIZE_LIMIT = 256


def _short_muxes(e: Expr) -> Expr:
    def fn(x: Expr) -> Expr | None:
        if x.op == "mux" and x.args[0].op == "const":
            return extend(x.args[1] if x.args[0].value else x.args[2], x.width)
        return None

    return transform(e, fn)


def forward_aliases(g: RtlGraph) -> list[int]:
    """Replace wires whose expression is a bare full-width ref by their source."""
    mapping: dict[int, Expr] = {}
    for nid in g.topo_order():
        n = g[nid]
        if n.kind is NodeKind.WIRE and n.expr.op == "ref" \
                and n.expr.width == n.width and n.expr.signed == n.signed:
            mapping[nid] = substitute(n.expr, mapping)
    if mapping:
        g.substitute(mapping)
        g.remove(list(mapping))
    return sorted(mapping)


def live_nodes(g: RtlGraph) -> set[int]:
    """Nodes with a path to an Output (through registers and memories)."""
    live: set[int] = set()
    stack = [n.id for n in g.nodes.values() if n.kind in (NodeKind.OUTPUT, NodeKind.INPUT)]
    while stack:
        nid = stack.pop()
        if nid in live:
            continue
        live.add(nid)
        n = g[nid]
        for e in n.exprs():
            stack.extend(refs(e))
        if n.kind is NodeKind.REG_READ:
            stack.append(n.partner)
        if n.is_mem_read:
            stack.extend(g.mems[n.mem].writers)
    return live


def _keep_probes(g: RtlGraph, removed: list[int]) -> None:
    """Re-express probes of removed nodes over surviving ones where possible."""
    removed_set = set(removed)
    users: dict[int, set[str]] = {}
    for k, p in g.probes.items():
        for r in refs(p):
            if r in removed_set:
                users.setdefault(r, set()).add(k)
    if not users:
        return
    order = [n for n in reversed(g.topo_order()) if n in removed_set]
    for nid in order:
        n = g[nid]
        if n.kind in (NodeKind.REG_READ, NodeKind.REG_WRITE, NodeKind.MEM) or n.expr is None:
            continue
        for k in sorted(users.pop(nid, ())):
            q = substitute(g.probes[k], {nid: n.expr})
            if sum(1 for _ in walk(q)) <= _PROBE_SIZE_LIMIT:
                g.probes[k] = q
                for r in refs(n.expr):
                    if r in removed_set:
                        users.setdefault(r, set()).add(k)


def eliminate_redundant(g: RtlGraph) -> tuple[RtlGraph, PassReport]:
    """Apply the four removals until nothing changes."""
    g = g.copy()
    report = PassReport("eliminate", nodes_before=len(g))
    removed = {"alias": [], "dead": [], "shorted": [], "unused_registers": []}
    names = {n.id: n.name for n in g.nodes.values()}
    while True:
        aliases = forward_aliases(g)
        removed["alias"] += aliases

        shorted_refs: set[int] = set()
        for n in g.nodes.values():
            if n.expr is None:
                continue
            e = _short_muxes(n.expr)
            if e is not n.expr:
                shorted_refs |= refs(n.expr) - refs(e)
                n.expr = e
                if n.reset is not None and not (e.op == "mux" and e.args[0] == n.reset.signal):
                    n.reset = None
        g.touch()

        live = live_nodes(g)
        dead = [k for k in g.nodes if k not in live]
        if dead:
            _keep_probes(g, dead)
        for k in dead:
            n = g[k]
            if n.kind is NodeKind.REG_READ:
                removed["unused_registers"].append(n.name)
            elif n.kind is NodeKind.REG_WRITE:
                pass
            elif k in shorted_refs:
                removed["shorted"].append(k)
            else:
                removed["dead"].append(k)
        g.remove(dead)
        if not aliases and not dead and not shorted_refs:
            break
    g.prune_probes()
    report.nodes_after = len(g)
    report.details = {
        "removed": {k: len(v) for k, v in removed.items()},
        "alias": [names[k] for k in removed["alias"]],
        "dead": [names[k] for k in removed["dead"]],
        "shorted": [names[k] for k in removed["shorted"]],
        "unused_registers": removed["unused_registers"],
    }
    return g, report
