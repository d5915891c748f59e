"""FIRRTL subset frontend: parse, flatten and lower to an RTL graph."""

from .ast import Circuit, Diagnostic, FirrtlError
from .flatten import flatten
from .lower import lower
from .parser import parse
from .printer import print_circuit


def load(text: str, file: str = "<input>"):
    """Parse, flatten and lower FIRRTL text; returns ``(graph, diagnostics)``."""
    circuit = parse(text, file)
    graph = lower(flatten(circuit, file), file)
    return graph, circuit.diagnostics


__all__ = ["Circuit", "Diagnostic", "FirrtlError", "flatten", "load", "lower", "parse",
           "print_circuit"]
