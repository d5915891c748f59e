"""Per-producer choice between branching and branchless activation."""

from __future__ import annotations

import enum

from ..ir.graph import RtlGraph
from .inline import CostParams


class Strategy(enum.Enum):
    BRANCHING = "Branching"
    BRANCHLESS = "Branchless"


def pick(succ_count: int, threshold: int) -> Strategy:
    if threshold > 0 and succ_count <= threshold:
        return Strategy.BRANCHLESS
    return Strategy.BRANCHING


def choose_activation_strategy(g: RtlGraph, p: CostParams | None = None) -> dict[int, Strategy]:
    """Branchless activation for nodes with at most ``threshold`` successors.

    Successor counts are static (graph out-degree).
    """
    p = p or CostParams()
    return {k: pick(len(v), p.activation_branchless_threshold) for k, v in g.succs().items()}
