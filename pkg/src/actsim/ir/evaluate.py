"""Expression evaluation and static cost estimation."""

from __future__ import annotations

from functools import lru_cache
from typing import Mapping

from .codegen import RUNTIME, Hoister, Namer, to_python
from .expr import Expr, walk
from .values import WORD_BITS, WideValue

DEFAULT_OP_WEIGHTS = {"mul": 4, "div": 4, "rem": 4}


@lru_cache(maxsize=4096)
def compile_expr(e: Expr):
    """Return ``fn(env, mem)`` evaluating ``e`` over an int-valued environment."""
    h = Hoister()
    src = to_python(e, Namer(lambda n: f"env[{n}]", lambda m: f"mem[{m}]"), h)
    code = "\n".join(["def _f(env, mem):", *h.lines, f"    return {src}"])
    ns = dict(RUNTIME)
    exec(code, ns)
    return ns["_f"]


def eval_expr(e: Expr, env: Mapping[int, int | WideValue],
              mems: Mapping[int, list] | None = None) -> WideValue:
    """Evaluate ``e`` with node values taken from ``env``.

    ``env`` may hold plain ints (canonical bit patterns) or WideValues.
    Division and remainder by zero yield 0.
    """
    ints = {k: (v.to_int() if isinstance(v, WideValue) else v) for k, v in env.items()}
    return WideValue.from_int(compile_expr(e)(ints, mems or {}), e.width)


def eval_int(e: Expr, env: Mapping[int, int] | None = None) -> int:
    return compile_expr(e)(env or {}, {})


def op_words(e: Expr, word_bits: int = WORD_BITS) -> int:
    w = max([e.width] + [a.width for a in e.args])
    return -(-w // word_bits)


def expr_cost(e: Expr, weights: Mapping[str, int] | None = None,
              word_bits: int = WORD_BITS) -> int:
    """Weighted operator count of ``e``.

    Refs and constants are free.  Every other operator costs its weight
    (1 unless overridden; mul/div/rem default to 4) times the number of
    machine words it touches.
    """
    weights = DEFAULT_OP_WEIGHTS if weights is None else weights
    total = 0
    for x in walk(e):
        if x.op in ("ref", "const"):
            continue
        total += weights.get(x.op, 1) * op_words(x, word_bits)
    return total
