"""Move per-register reset muxes to a once-per-reset-signal slow path."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..ir.expr import Expr
from ..ir.graph import NodeKind, RtlGraph
from .report import PassReport


@dataclass
class ResetGroup:
    signal: int                                   # reset node id
    members: list[tuple[int, Expr]] = field(default_factory=list)  # (register read id, init)

    @property
    def registers(self) -> list[int]:
        return [r for r, _ in self.members]


def build_reset_groups(g: RtlGraph) -> tuple[list[ResetGroup], RtlGraph, PassReport]:
    """Strip ``mux(rst, init, next)`` from register writes and group by ``rst``.

    Register writes keep their reset info so the reset can be applied after
    the commit; their expressions become the plain next-state value.
    """
    g = g.copy()
    report = PassReport("reset", nodes_before=len(g))
    groups: dict[int, ResetGroup] = {}
    for n in g.nodes.values():
        if n.kind is not NodeKind.REG_WRITE or n.reset is None:
            continue
        e, info = n.expr, n.reset
        if info.signal.op != "ref" or e.op != "mux" or e.args[0] != info.signal \
                or e.args[1] != info.init:
            continue
        n.expr = e.args[2]
        groups.setdefault(info.signal.node, ResetGroup(info.signal.node)).members.append(
            (n.partner, info.init))
    g.touch()
    out = [groups[k] for k in sorted(groups)]
    report.nodes_after = len(g)
    report.details = {"groups": len(out),
                      "group_sizes": {g[grp.signal].name: len(grp.members) for grp in out},
                      "reset_checks_per_cycle": len(out)}
    return out, g, report
