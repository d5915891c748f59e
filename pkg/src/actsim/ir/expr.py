"""Width-annotated expression trees.

An :class:`Expr` is an immutable operator tree.  Every node carries its result
width and signedness, computed by :func:`make` from the FIRRTL primitive-op
width rules.  Constants hold their canonical (two's-complement, zero-extended)
bit pattern, never a negative Python int.
"""

from __future__ import annotations

from typing import Callable, Iterator

MAX_WIDTH = 1024

ARITH_OPS = {"add", "sub", "mul", "div", "rem"}
COMPARE_OPS = {"lt", "leq", "gt", "geq", "eq", "neq"}
BITWISE_OPS = {"and", "or", "xor"}
REDUCE_OPS = {"andr", "orr", "xorr"}
CAST_OPS = {"asUInt", "asSInt", "cvt"}
SHIFT_OPS = {"shl", "shr"}
DSHIFT_OPS = {"dshl", "dshr"}
PRIM_OPS = (ARITH_OPS | COMPARE_OPS | BITWISE_OPS | REDUCE_OPS | CAST_OPS
            | SHIFT_OPS | DSHIFT_OPS | {"not", "cat", "bits", "pad", "mux"})
LEAF_OPS = {"const", "ref"}
MEM_OPS = {"memread", "memwrite"}


class WidthError(ValueError):
    """Raised when an operator is applied to ill-typed operands."""


class Expr:
    """Immutable operator tree node; treat instances as values."""

    __slots__ = ("op", "args", "params", "width", "signed", "_hash")

    def __init__(self, op: str, args: tuple["Expr", ...] = (), params: tuple[int, ...] = (),
                 width: int = 1, signed: bool = False):
        self.op = op
        self.args = args
        self.params = params
        self.width = width
        self.signed = signed
        # children hash first, so this never recurses deeply
        self._hash = hash((op, args, params, width, signed))

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, Expr):
            return NotImplemented
        if self._hash != other._hash:
            return False
        return (self.op == other.op and self.width == other.width
                and self.signed == other.signed and self.params == other.params
                and self.args == other.args)

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return to_sexpr(self)

    @property
    def value(self) -> int:
        assert self.op == "const"
        return self.params[0]

    @property
    def node(self) -> int:
        assert self.op == "ref"
        return self.params[0]

    def is_const(self, value: int | None = None) -> bool:
        return self.op == "const" and (value is None or self.params[0] == value)


def mask(width: int) -> int:
    return (1 << width) - 1


def to_signed(value: int, width: int) -> int:
    sign = 1 << (width - 1)
    return (value ^ sign) - sign


def const(value: int, width: int, signed: bool = False) -> Expr:
    if width < 1:
        raise WidthError(f"constant width must be positive, got {width}")
    if value < 0:
        if not signed or value < -(1 << (width - 1)):
            raise WidthError(f"constant {value} does not fit in {width} bits")
        value &= mask(width)
    elif value >> (width - (1 if signed else 0)):
        raise WidthError(f"constant {value} does not fit in "
                         f"{'SInt' if signed else 'UInt'}<{width}>")
    return Expr("const", (), (value,), width, signed)


def ref(node: int, width: int, signed: bool = False) -> Expr:
    return Expr("ref", (), (node,), width, signed)


def result_type(op: str, args: tuple[Expr, ...], params: tuple[int, ...]) -> tuple[int, bool]:
    """Return ``(width, signed)`` for ``op`` applied to ``args``."""
    def need(n_args: int, n_params: int = 0) -> None:
        if len(args) != n_args or len(params) != n_params:
            raise WidthError(f"{op} expects {n_args} operand(s) and "
                             f"{n_params} constant(s)")

    def same_sign() -> bool:
        if args[0].signed != args[1].signed:
            raise WidthError(f"{op} operands must both be UInt or both SInt")
        return args[0].signed

    if op in ("add", "sub"):
        need(2)
        s = same_sign()
        return max(args[0].width, args[1].width) + 1, s
    if op == "mul":
        need(2)
        s = same_sign()
        return args[0].width + args[1].width, s
    if op == "div":
        need(2)
        s = same_sign()
        return args[0].width + (1 if s else 0), s
    if op == "rem":
        need(2)
        s = same_sign()
        return min(args[0].width, args[1].width), s
    if op in COMPARE_OPS:
        need(2)
        same_sign()
        return 1, False
    if op == "pad":
        need(1, 1)
        return max(args[0].width, params[0]), args[0].signed
    if op == "asUInt":
        need(1)
        return args[0].width, False
    if op == "asSInt":
        need(1)
        return args[0].width, True
    if op == "cvt":
        need(1)
        return args[0].width + (0 if args[0].signed else 1), True
    if op == "shl":
        need(1, 1)
        return args[0].width + params[0], args[0].signed
    if op == "shr":
        need(1, 1)
        return max(args[0].width - params[0], 1), args[0].signed
    if op == "dshl":
        need(2)
        if args[1].signed:
            raise WidthError("dshl shift amount must be UInt")
        if args[1].width > 10:
            raise WidthError("dshl shift amount wider than 10 bits")
        return args[0].width + (1 << args[1].width) - 1, args[0].signed
    if op == "dshr":
        need(2)
        if args[1].signed:
            raise WidthError("dshr shift amount must be UInt")
        return args[0].width, args[0].signed
    if op == "not":
        need(1)
        return args[0].width, False
    if op in BITWISE_OPS:
        need(2)
        return max(args[0].width, args[1].width), False
    if op in REDUCE_OPS:
        need(1)
        return 1, False
    if op == "cat":
        need(2)
        return args[0].width + args[1].width, False
    if op == "bits":
        need(1, 2)
        hi, lo = params
        if not (0 <= lo <= hi < args[0].width):
            raise WidthError(f"bits({hi}, {lo}) out of range for width {args[0].width}")
        return hi - lo + 1, False
    if op == "mux":
        need(3)
        if args[0].width != 1 or args[0].signed:
            raise WidthError("mux condition must be UInt<1>")
        if args[1].signed != args[2].signed:
            raise WidthError("mux arms must both be UInt or both SInt")
        return max(args[1].width, args[2].width), args[1].signed
    if op == "memread":
        # params: (mem id, data width, depth)
        need(1, 3)
        return params[1], False
    if op == "memwrite":
        # args: valid, addr, data; packed as cat(valid, addr, data)
        need(3, 1)
        return 1 + args[1].width + args[2].width, False
    raise WidthError(f"unknown operator {op!r}")


def make(op: str, *args: Expr, params: tuple[int, ...] = (), max_width: int = MAX_WIDTH) -> Expr:
    width, signed = result_type(op, args, params)
    if width > max_width:
        raise WidthError(f"{op} result width {width} exceeds the {max_width}-bit cap")
    return Expr(op, args, params, width, signed)


def extend(e: Expr, width: int, signed: bool | None = None) -> Expr:
    """Sign- or zero-extend ``e`` to ``width`` bits, keeping its signedness."""
    if signed is not None and signed != e.signed:
        raise WidthError("cannot change signedness while extending")
    if e.width == width:
        return e
    if e.width > width:
        raise WidthError(f"cannot extend a {e.width}-bit value to {width} bits")
    if e.op == "const":
        v = to_signed(e.value, e.width) if e.signed else e.value
        return const(v, width, e.signed)
    return make("pad", e, params=(width,))


def bits(e: Expr, hi: int, lo: int) -> Expr:
    return make("bits", e, params=(hi, lo))


def walk(e: Expr) -> Iterator[Expr]:
    stack = [e]
    while stack:
        x = stack.pop()
        yield x
        stack.extend(x.args)


def refs(e: Expr) -> set[int]:
    return {x.params[0] for x in walk(e) if x.op == "ref"}


def count_refs(e: Expr, counts: dict[int, int]) -> None:
    for x in walk(e):
        if x.op == "ref":
            n = x.params[0]
            counts[n] = counts.get(n, 0) + 1


def contains_op(e: Expr, ops: set[str]) -> bool:
    return any(x.op in ops for x in walk(e))


def transform(e: Expr, fn: Callable[[Expr], Expr | None]) -> Expr:
    """Rebuild ``e`` bottom-up; ``fn`` may return a replacement or ``None``."""
    if e.args:
        new_args = tuple(transform(a, fn) for a in e.args)
        if any(n is not o for n, o in zip(new_args, e.args)):
            e = Expr(e.op, new_args, e.params, e.width, e.signed)
    out = fn(e)
    return e if out is None else out


def substitute(e: Expr, mapping: dict[int, Expr]) -> Expr:
    """Replace ``ref(n)`` by ``mapping[n]`` (widths must agree)."""
    if not mapping:
        return e

    def sub(x: Expr) -> Expr | None:
        if x.op == "ref" and x.params[0] in mapping:
            return mapping[x.params[0]]
        return None

    return transform(e, sub)


def to_sexpr(e: Expr) -> str:
    if e.op == "const":
        return f"{'s' if e.signed else 'u'}{e.width}:{e.value}"
    if e.op == "ref":
        return f"%{e.params[0]}"
    parts = [e.op] + [to_sexpr(a) for a in e.args] + [str(p) for p in e.params]
    return "(" + " ".join(parts) + ")"
