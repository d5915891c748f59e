"""Graph-to-graph optimization passes."""

from .activation import Strategy, choose_activation_strategy
from .bitsplit import BitSliceLattice, analyze_bit_usage, bit_split, split_nodes
from .inline import CostParams, decide_inline, should_extract
from .redundant import eliminate_redundant
from .report import PassReport
from .reset import ResetGroup, build_reset_groups
from .simplify import simplify_expressions

__all__ = ["BitSliceLattice", "CostParams", "PassReport", "ResetGroup", "Strategy",
           "analyze_bit_usage", "bit_split", "build_reset_groups", "choose_activation_strategy",
           "decide_inline", "eliminate_redundant", "should_extract", "simplify_expressions",
           "split_nodes"]
