"""actsim: an activity-driven RTL simulation compiler for a scalar FIRRTL subset."""

import sys

# expression trees from long when-chains are walked recursively
if sys.getrecursionlimit() < 20000:
    sys.setrecursionlimit(20000)

__version__ = "0.1.0"
