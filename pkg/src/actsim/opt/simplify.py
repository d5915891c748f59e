"""Constant folding, identity laws, cat/bits cancellation and the one-hot rewrite."""

from __future__ import annotations

from ..ir.evaluate import eval_int, expr_cost
from ..ir.expr import Expr, extend, make, refs, substitute, to_sexpr, transform
from ..ir.graph import NodeKind, RtlGraph
from .report import PassReport

_NO_FOLD = {"memread", "memwrite", "ref", "const"}


def _const(value: int, width: int, signed: bool) -> Expr:
    return Expr("const", (), (value,), width, signed)


def _same(e: Expr, width: int, signed: bool) -> bool:
    return e.width == width and e.signed == signed


class _Rules:
    def __init__(self, g: RtlGraph):
        self.g = g
        self.one_hot = 0
        self.folds = 0

    def _one_hot_source(self, e: Expr) -> Expr | None:
        """Return ``A`` if ``e`` is ``dshl(1, A)``, possibly behind a node ref."""
        if e.op == "ref":
            n = self.g.nodes.get(e.node)
            if n is None or n.kind is not NodeKind.WIRE or n.expr is None:
                return None
            e = n.expr
        if e.op == "dshl" and e.args[0].is_const(1) and not e.args[0].signed:
            a = e.args[1]
            if a.op in ("ref", "const"):
                return a
        return None

    def rewrite(self, x: Expr) -> Expr | None:
        op, a = x.op, x.args
        if op not in _NO_FOLD and all(y.op == "const" for y in a):
            self.folds += 1
            return _const(eval_int(x), x.width, x.signed)
        if op == "mux":
            c, t, f = a
            if c.op == "const":
                arm = t if c.value else f
                return extend(arm, x.width)
            if t == f:
                return extend(t, x.width)
            if x.width == 1 and t.is_const(1) and f.is_const(0):
                return c
        elif op == "and":
            for y in a:
                if y.is_const(0):
                    return _const(0, x.width, False)
        elif op in ("or", "xor"):
            p, q = a
            for y, z in ((p, q), (q, p)):
                if y.is_const(0) and _same(z, x.width, False):
                    return z
        elif op in ("shl", "shr"):
            if x.params[0] == 0:
                return a[0]
        elif op == "pad":
            if x.params[0] <= a[0].width:
                return a[0]
        elif op == "asUInt" and not a[0].signed:
            return a[0]
        elif op == "asSInt" and a[0].signed:
            return a[0]
        elif op == "cvt" and a[0].signed:
            return a[0]
        elif op == "bits":
            hi, lo = x.params
            y = a[0]
            if lo == 0 and hi == y.width - 1 and not y.signed:
                return y
            if y.op == "bits":
                return make("bits", y.args[0], params=(hi + y.params[1], lo + y.params[1]))
            if y.op == "cat":
                p, q = y.args
                wq = q.width
                if lo >= wq:
                    return make("bits", p, params=(hi - wq, lo - wq))
                if hi < wq:
                    return make("bits", q, params=(hi, lo))
            if y.op == "pad" and not y.args[0].signed and hi < y.args[0].width:
                return make("bits", y.args[0], params=(hi, lo))
            if hi == lo:
                src = self._one_hot_source(y)
                if src is not None:
                    self.one_hot += 1
                    return make("eq", src, _const(hi, src.width, False))
        return None

    def simp(self, e: Expr) -> Expr:
        def fn(x: Expr) -> Expr | None:
            # children are already simplified; rules only rebuild the top node
            out = None
            for _ in range(16):
                r = self.rewrite(x)
                if r is None:
                    break
                out = x = r
            return out

        return transform(e, fn)


def simplify_expr(e: Expr, g: RtlGraph | None = None) -> Expr:
    return _Rules(g or RtlGraph()).simp(e)


def simplify_expressions(g: RtlGraph, max_rounds: int = 10) -> tuple[RtlGraph, PassReport]:
    """Rewrite every node's expression to a fixed point; never raises cost.

    Wire nodes that fold to constants are propagated into their consumers.
    """
    g = g.copy()
    report = PassReport("simplify", nodes_before=len(g))
    rules = _Rules(g)
    rewrites: list[dict] = []
    changed_nodes = 0
    for _ in range(max_rounds):
        changed = False
        consts: dict[int, Expr] = {}
        for nid in g.topo_order():
            n = g[nid]
            if n.expr is None:
                continue
            old = n.expr
            e = substitute(old, consts)
            before_hot = rules.one_hot
            e = rules.simp(e)
            if n.kind is not NodeKind.MEM:
                e = extend(e, n.width) if e.width < n.width else e
            if e is not old and e != old and expr_cost(e) <= expr_cost(old) \
                    and e.width == old.width and e.signed == old.signed:
                if rules.one_hot > before_hot:
                    rewrites.append(_one_hot_entry(g, n, old, e))
                n.expr = e
                changed = True
                changed_nodes += 1
            else:
                rules.one_hot = before_hot
            if n.reset is not None:
                n.reset.signal = substitute(n.reset.signal, consts)
                n.reset.init = rules.simp(substitute(n.reset.init, consts))
                if n.reset.signal.op != "ref" and not _has_reset_mux(n):
                    n.reset = None
            if n.kind is NodeKind.WIRE and n.expr.op == "const":
                consts[nid] = n.expr
        if consts:
            g.probes = {k: substitute(p, consts) for k, p in g.probes.items()}
        g.touch()
        if not changed:
            break
    report.nodes_after = len(g)
    report.details = {"changed_nodes": changed_nodes, "constant_folds": rules.folds,
                      "one_hot_rewrites": len(rewrites), "one_hot": rewrites}
    return g, report


def _has_reset_mux(n) -> bool:
    e = n.expr
    return e.op == "mux" and e.args[0] == n.reset.signal


def _one_hot_entry(g: RtlGraph, n, old: Expr, new: Expr) -> dict:
    # the consumer is costed with any referenced dshl(1, A) node folded in,
    # since that is the logic the rewrite makes unnecessary
    inlined = {r: g[r].expr for r in refs(old)
               if g[r].kind is NodeKind.WIRE and g[r].expr is not None
               and g[r].expr.op == "dshl"}
    return {"node": n.name, "before": to_sexpr(old), "after": to_sexpr(new),
            "cost_before": expr_cost(substitute(old, inlined)), "cost_after": expr_cost(new)}
