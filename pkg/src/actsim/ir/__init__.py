"""Graph IR: expressions, values, evaluation and the RTL graph."""

from .evaluate import eval_expr, expr_cost
from .expr import Expr, WidthError, const, make, ref
from .graph import CycleError, NodeKind, ResetInfo, RtlGraph, RtlNode
from .values import WideValue

__all__ = ["CycleError", "Expr", "NodeKind", "ResetInfo", "RtlGraph", "RtlNode", "WideValue",
           "WidthError", "const", "eval_expr", "expr_cost", "make", "ref"]
