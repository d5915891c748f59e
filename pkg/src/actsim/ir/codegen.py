"""Translate expression trees into Python source over canonical ints.

This is the one place where operator semantics live.  The oracle, the
activity-driven engine and :func:`~actsim.ir.evaluate.eval_expr` all run code
produced here, so expression semantics cannot drift between them.

Every generated subexpression evaluates to the canonical unsigned bit pattern
of its width: SInt values are kept in two's-complement form and only
reinterpreted as negative numbers where an operator needs it.
"""

from __future__ import annotations

from typing import Callable

from .expr import Expr


def _udiv(a: int, b: int) -> int:
    return a // b if b else 0


def _urem(a: int, b: int) -> int:
    return a % b if b else 0


def _sdiv(a: int, b: int) -> int:
    if b == 0:
        return 0
    q = abs(a) // abs(b)
    return -q if (a < 0) != (b < 0) else q


def _srem(a: int, b: int) -> int:
    if b == 0:
        return 0
    r = abs(a) % abs(b)
    return -r if a < 0 else r


def _mrd(store: list, addr: int) -> int:
    return store[addr] if addr < len(store) else 0


RUNTIME = {"_udiv": _udiv, "_urem": _urem, "_sdiv": _sdiv, "_srem": _srem, "_mrd": _mrd}


class Namer:
    """Maps node and memory ids to Python source snippets."""

    def __init__(self, ref: Callable[[int], str], mem: Callable[[int], str] | None = None):
        self.ref = ref
        self.mem = mem or (lambda m: f"mem[{m}]")


def _sx(src: str, width: int) -> str:
    s = 1 << (width - 1)
    return f"(({src} ^ {s}) - {s})"


def _ext(e: Expr, src: str, width: int) -> str:
    """Widen an operand's bit pattern to ``width`` honouring its sign."""
    if not e.signed or e.width >= width:
        return src
    return f"({_sx(src, e.width)} & {(1 << width) - 1})"


MAX_NESTING = 12


def to_python(e: Expr, names: Namer, hoist: Callable[[str], str] | None = None,
              max_nesting: int = MAX_NESTING) -> str:
    """Python source for ``e``.

    With ``hoist``, any subexpression nested ``max_nesting`` operators deep is
    handed to ``hoist`` (which should bind it to a temporary and return the
    temporary's name), keeping generated code within the parser's limits.
    """
    def gen(x: Expr) -> tuple[str, int]:
        if x.op == "ref":
            return names.ref(x.params[0]), 0
        if x.op == "const":
            return str(x.params[0]), 0
        parts = [gen(y) for y in x.args]
        src = _op_src(x, [p[0] for p in parts], names)
        depth = 1 + max(p[1] for p in parts)
        if hoist is not None and depth >= max_nesting:
            return hoist(src), 0
        return src, depth

    return gen(e)[0]


class Hoister:
    """Collects temporaries for :func:`to_python`; one instance per function."""

    def __init__(self, prefix: str = "_t", indent: str = "    "):
        self.prefix = prefix
        self.indent = indent
        self.lines: list[str] = []
        self.count = 0

    def __call__(self, src: str) -> str:
        name = f"{self.prefix}{self.count}"
        self.count += 1
        self.lines.append(f"{self.indent}{name} = {src}")
        return name

    def take(self) -> list[str]:
        out, self.lines = self.lines, []
        return out


def _op_src(e: Expr, a: list[str], names: Namer) -> str:
    op = e.op
    w = e.width
    m = (1 << w) - 1

    if op in ("add", "sub", "mul"):
        sym = {"add": "+", "sub": "-", "mul": "*"}[op]
        x, y = e.args
        if x.signed:
            return f"(({_sx(a[0], x.width)} {sym} {_sx(a[1], y.width)}) & {m})"
        if op == "sub":
            return f"(({a[0]} - {a[1]}) & {m})"
        return f"({a[0]} {sym} {a[1]})"
    if op in ("div", "rem"):
        x, y = e.args
        if x.signed:
            fn = "_sdiv" if op == "div" else "_srem"
            return f"({fn}({_sx(a[0], x.width)}, {_sx(a[1], y.width)}) & {m})"
        fn = "_udiv" if op == "div" else "_urem"
        return f"{fn}({a[0]}, {a[1]})"
    if op in ("lt", "leq", "gt", "geq", "eq", "neq"):
        sym = {"lt": "<", "leq": "<=", "gt": ">", "geq": ">=", "eq": "==", "neq": "!="}[op]
        x, y = e.args
        if x.signed:
            return f"+({_sx(a[0], x.width)} {sym} {_sx(a[1], y.width)})"
        return f"+({a[0]} {sym} {a[1]})"
    if op == "pad":
        return _ext(e.args[0], a[0], w)
    if op in ("asUInt", "asSInt", "cvt"):
        return a[0]
    if op == "shl":
        n = e.params[0]
        return a[0] if n == 0 else f"({a[0]} << {n})"
    if op == "shr":
        x = e.args[0]
        n = min(e.params[0], x.width - 1) if x.signed else e.params[0]
        if n == 0:
            return a[0]
        if n >= x.width:
            return "0"
        return f"({a[0]} >> {n})"
    if op == "dshl":
        x = e.args[0]
        if x.signed:
            # the result is wider than the shift can fill, so sign-extend first
            return f"(({_sx(a[0], x.width)} << {a[1]}) & {m})"
        return f"({a[0]} << {a[1]})"
    if op == "dshr":
        x = e.args[0]
        if x.signed:
            return f"(({_sx(a[0], x.width)} >> {a[1]}) & {m})"
        return f"({a[0]} >> {a[1]})"
    if op == "not":
        return f"({a[0]} ^ {m})"
    if op in ("and", "or", "xor"):
        sym = {"and": "&", "or": "|", "xor": "^"}[op]
        x, y = e.args
        return f"({_ext(x, a[0], w)} {sym} {_ext(y, a[1], w)})"
    if op == "andr":
        return f"+({a[0]} == {(1 << e.args[0].width) - 1})"
    if op == "orr":
        return f"+({a[0]} != 0)"
    if op == "xorr":
        return f"(({a[0]}).bit_count() & 1)"
    if op == "cat":
        return f"(({a[0]} << {e.args[1].width}) | {a[1]})"
    if op == "bits":
        hi, lo = e.params
        x = e.args[0]
        if lo == 0:
            return a[0] if hi == x.width - 1 else f"({a[0]} & {m})"
        if hi == x.width - 1:
            return f"({a[0]} >> {lo})"
        return f"(({a[0]} >> {lo}) & {m})"
    if op == "mux":
        _, x, y = e.args
        return f"({_ext(x, a[1], w)} if {a[0]} else {_ext(y, a[2], w)})"
    if op == "memread":
        mem_id, _, depth = e.params
        addr = e.args[0]
        if (1 << addr.width) <= depth:
            return f"{names.mem(mem_id)}[{a[0]}]"
        return f"_mrd({names.mem(mem_id)}, {a[0]})"
    if op == "memwrite":
        _, addr, data = e.args
        return f"(({a[0]} << {addr.width + data.width}) | ({a[1]} << {data.width}) | {a[2]})"
    raise ValueError(f"cannot generate code for operator {op!r}")
