"""Bit-level node splitting.

A node is cut into contiguous slices when some consumer reads only part of
it and the node's own expression can be narrowed to each slice without
duplicating arithmetic.  Cuts propagate backward: a slice of a consumer only
demands the matching bits of its sources, so chains of ``cat``/``bits``
/``mux`` are split end to end, register loops included.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

from ..ir.expr import Expr, const, make, mask
from ..ir.graph import NodeKind, ResetInfo, RtlGraph
from .report import PassReport

_PASS = {"asUInt", "asSInt"}


@dataclass
class BitSliceLattice:
    """Cut positions per splittable node; a register is keyed by its read node."""

    widths: dict[int, int]
    cuts: dict[int, tuple[int, ...]] = field(default_factory=dict)
    frozen: set[int] = field(default_factory=set)

    def slices(self, nid: int) -> list[tuple[int, int]]:
        """``(hi, lo)`` pairs from the least significant slice upward."""
        bounds = [0, *self.cuts.get(nid, ()), self.widths[nid]]
        return [(bounds[i + 1] - 1, bounds[i]) for i in range(len(bounds) - 1)]

    def split_nodes(self) -> list[int]:
        return sorted(k for k, v in self.cuts.items() if v)


# demand ------------------------------------------------------------------------

def _arm_range(arm: Expr, hi: int, lo: int) -> tuple[int, int] | None:
    """Bits of a (possibly extended) operand needed for result bits [hi:lo]."""
    aw = arm.width
    if hi < aw:
        return hi, lo
    if arm.signed:
        return aw - 1, min(lo, aw - 1)
    if lo >= aw:
        return None
    return aw - 1, lo


def _demand(e: Expr, hi: int, lo: int, out: dict[int, set]) -> None:
    op = e.op
    if op == "ref":
        out[e.params[0]].add((hi, lo))
    elif op == "const":
        return
    elif op == "bits":
        base = e.params[1]
        _demand(e.args[0], hi + base, lo + base, out)
    elif op == "cat":
        a, b = e.args
        wb = b.width
        if lo < wb:
            _demand(b, min(hi, wb - 1), lo, out)
        if hi >= wb:
            _demand(a, hi - wb, max(lo - wb, 0), out)
    elif op in _PASS:
        _demand(e.args[0], hi, lo, out)
    elif op == "pad":
        r = _arm_range(e.args[0], hi, lo)
        if r:
            _demand(e.args[0], *r, out)
    elif op == "mux":
        c, t, f = e.args
        _demand(c, 0, 0, out)
        for arm in (t, f):
            r = _arm_range(arm, hi, lo)
            if r:
                _demand(arm, *r, out)
    else:
        for a in e.args:
            _demand(a, a.width - 1, 0, out)


# where a node's own expression may be cut for free ----------------------------

_ALL = None


def _arm_allowed(arm: Expr, width: int):
    inner = _allowed(arm)
    if arm.width == width:
        return inner
    if arm.signed:
        return set()
    base = set(range(1, arm.width)) if inner is _ALL else inner
    return base | set(range(arm.width, width))


def _intersect(a, b):
    if a is _ALL:
        return b
    if b is _ALL:
        return a
    return a & b


def _allowed(e: Expr):
    """Cut positions p (between bit p-1 and p) that need no duplicated logic."""
    op = e.op
    if op in ("ref", "const"):
        return _ALL
    if op == "bits":
        hi, lo = e.params
        inner = _allowed(e.args[0])
        if inner is _ALL:
            return _ALL
        return {p - lo for p in inner if lo < p <= hi}
    if op == "cat":
        a, b = e.args
        wb = b.width
        la, lb = _allowed(a), _allowed(b)
        la = set(range(1, a.width)) if la is _ALL else la
        lb = set(range(1, wb)) if lb is _ALL else lb
        return lb | {wb} | {p + wb for p in la}
    if op in _PASS:
        return _allowed(e.args[0])
    if op == "pad":
        return _arm_allowed(e.args[0], e.width)
    if op == "mux":
        c, t, f = e.args
        if c.op not in ("ref", "const"):
            return set()
        return _intersect(_arm_allowed(t, e.width), _arm_allowed(f, e.width))
    return set()


def _splittable(g: RtlGraph) -> dict[int, object]:
    out = {}
    for n in g.nodes.values():
        if n.width < 2:
            continue
        if n.kind is NodeKind.WIRE:
            out[n.id] = _allowed(n.expr)
        elif n.kind is NodeKind.REG_READ:
            out[n.id] = _allowed(g[n.partner].expr)
    return out


def analyze_bit_usage(g: RtlGraph, max_slices: int = 8) -> BitSliceLattice:
    """Iterate slice demands to a fixed point.

    Nodes that would need more than ``max_slices`` slices are frozen whole and
    the analysis restarts without them.
    """
    allowed = _splittable(g)
    widths = {n.id: n.width for n in g.nodes.values()}
    frozen: set[int] = set()
    while True:
        cuts: dict[int, tuple[int, ...]] = {k: () for k in allowed if k not in frozen}
        while True:
            lat = BitSliceLattice(widths, cuts, frozen)
            demands: dict[int, set] = defaultdict(set)
            for n in g.nodes.values():
                if n.expr is None:
                    continue
                key = n.partner if n.kind is NodeKind.REG_WRITE else n.id
                if cuts.get(key):
                    for hi, lo in lat.slices(key):
                        _demand(n.expr, hi, lo, demands)
                else:
                    _demand(n.expr, n.expr.width - 1, 0, demands)
                if n.reset is not None:
                    _demand(n.reset.signal, 0, 0, demands)
            new: dict[int, tuple[int, ...]] = {}
            for k in cuts:
                w = widths[k]
                bounds = set()
                for hi, lo in demands.get(k, ()):
                    bounds.add(lo)
                    bounds.add(hi + 1)
                bounds = {b for b in bounds if 0 < b < w}
                ok = allowed[k]
                if ok is not _ALL:
                    bounds &= ok
                new[k] = tuple(sorted(bounds | set(cuts[k])))
            if new == cuts:
                break
            cuts = new
        over = [k for k, v in cuts.items() if len(v) + 1 > max_slices]
        if not over:
            return BitSliceLattice(widths, {k: v for k, v in cuts.items() if v}, frozen)
        frozen.update(over)


# rewriting ----------------------------------------------------------------------

class _Rewriter:
    def __init__(self, g: RtlGraph, lat: BitSliceLattice, slice_ids: dict[int, list]):
        self.g = g
        self.lat = lat
        self.slice_ids = slice_ids   # old id -> [(hi, lo, new node id)], low slice first

    def full(self, nid: int) -> Expr:
        n = self.g[nid]
        parts = self.slice_ids[nid]
        e = None
        for hi, lo, sid in parts:
            r = Expr("ref", (), (sid,), hi - lo + 1, False)
            e = r if e is None else make("cat", r, e)
        return make("asSInt", e) if n.signed else e

    def rewrite(self, e: Expr) -> Expr:
        if e.op == "bits":
            return self.narrow(e.args[0], *e.params)
        if e.op == "ref":
            return self.full(e.node) if e.node in self.slice_ids else e
        if not e.args:
            return e
        args = tuple(self.rewrite(a) for a in e.args)
        if all(x is y for x, y in zip(args, e.args)):
            return e
        return Expr(e.op, args, e.params, e.width, e.signed)

    def _bits(self, e: Expr, hi: int, lo: int) -> Expr:
        if lo == 0 and hi == e.width - 1 and not e.signed:
            return e
        return make("bits", e, params=(hi, lo))

    def _ext_arm(self, arm: Expr, hi: int, lo: int) -> Expr:
        """bits [hi:lo] of an unsigned operand zero-extended past its width."""
        w = hi - lo + 1
        aw = arm.width
        if lo >= aw:
            return const(0, w)
        if hi < aw:
            return self.narrow(arm, hi, lo)
        inner = self.narrow(arm, aw - 1, lo)
        return make("pad", inner, params=(w,))

    def narrow(self, e: Expr, hi: int, lo: int) -> Expr:
        """An unsigned expression equal to ``bits(e, hi, lo)``."""
        op = e.op
        w = hi - lo + 1
        if op == "const":
            return const((e.value >> lo) & mask(w), w)
        if op == "ref":
            nid = e.node
            if nid not in self.slice_ids:
                return self._bits(e, hi, lo)
            pieces = []
            for shi, slo, sid in self.slice_ids[nid]:
                if shi < lo or slo > hi:
                    continue
                r = Expr("ref", (), (sid,), shi - slo + 1, False)
                a, b = max(lo, slo) - slo, min(hi, shi) - slo
                pieces.append(self._bits(r, b, a))
            out = pieces[0]
            for p in pieces[1:]:
                out = make("cat", p, out)
            return out
        if op == "bits":
            base = e.params[1]
            return self.narrow(e.args[0], hi + base, lo + base)
        if op == "cat":
            a, b = e.args
            wb = b.width
            if hi < wb:
                return self.narrow(b, hi, lo)
            if lo >= wb:
                return self.narrow(a, hi - wb, lo - wb)
            return make("cat", self.narrow(a, hi - wb, 0), self.narrow(b, wb - 1, lo))
        if op in _PASS:
            return self.narrow(e.args[0], hi, lo)
        if op == "pad" and not e.args[0].signed:
            return self._ext_arm(e.args[0], hi, lo)
        if op == "mux" and all(a.width == e.width or not a.signed for a in e.args[1:]):
            c, t, f = e.args
            return make("mux", self.rewrite(c), self._ext_arm(t, hi, lo),
                        self._ext_arm(f, hi, lo))
        return self._bits(self.rewrite(e), hi, lo)


def split_nodes(g: RtlGraph, lat: BitSliceLattice) -> tuple[RtlGraph, PassReport]:
    """Replace every cut node by one node per slice and rewrite all users."""
    g = g.copy()
    report = PassReport("bit-split", nodes_before=len(g))
    slice_ids: dict[int, list] = {}
    write_slices: dict[int, list] = {}
    decisions = {}
    for nid in lat.split_nodes():
        n = g[nid]
        slices = lat.slices(nid)
        decisions[n.name] = [[hi, lo] for hi, lo in slices]
        slice_ids[nid] = []
        for i, (hi, lo) in enumerate(slices):
            seq = n.seq + (i + 1) / (len(slices) + 1)
            s = g.add(f"{n.name}[{hi}:{lo}]", n.kind, hi - lo + 1, False, seq=seq)
            slice_ids[nid].append((hi, lo, s.id))
        if n.kind is NodeKind.REG_READ:
            w = g[n.partner]
            write_slices[n.partner] = []
            for i, (hi, lo, rid) in enumerate(slice_ids[nid]):
                seq = w.seq + (i + 1) / (len(slices) + 1)
                ws = g.add(f"{n.name}[{hi}:{lo}]$next", NodeKind.REG_WRITE, hi - lo + 1,
                           False, seq=seq, partner=rid)
                g[rid].partner = ws.id
                write_slices[n.partner].append((hi, lo, ws.id))
    rw = _Rewriter(g, lat, slice_ids)
    originals = [k for k in list(g.nodes) if k in slice_ids or k in write_slices]
    for nid in originals:
        n = g[nid]
        parts = slice_ids.get(nid) or write_slices[nid]
        if n.kind is NodeKind.REG_READ:
            continue
        for hi, lo, sid in parts:
            s = g[sid]
            s.expr = rw.narrow(n.expr, hi, lo)
            if n.reset is not None:
                s.reset = ResetInfo(n.reset.signal, rw.narrow(n.reset.init, hi, lo))
    new_ids = {sid for v in list(slice_ids.values()) + list(write_slices.values())
               for _, _, sid in v}
    for n in g.nodes.values():
        if n.id in new_ids or n.id in slice_ids or n.id in write_slices or n.expr is None:
            continue
        n.expr = rw.rewrite(n.expr)
        if n.reset is not None:
            n.reset.init = rw.rewrite(n.reset.init)
    g.probes = {k: rw.rewrite(p) for k, p in g.probes.items()}
    g.remove(originals)
    report.nodes_after = len(g)
    report.details = {"split_nodes": len(decisions), "new_slices":
                      sum(len(v) for v in decisions.values()), "slices": decisions,
                      "frozen": sorted(g.nodes[k].name for k in lat.frozen if k in g.nodes)}
    return g, report


def bit_split(g: RtlGraph, max_slices: int = 8) -> tuple[RtlGraph, PassReport]:
    return split_nodes(g, analyze_bit_usage(g, max_slices))
