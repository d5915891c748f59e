"""Supernode construction: pre-grouping, greedy packing and Kernighan refinement.

Only evaluated nodes are partitioned.  Inputs and register reads hold values
written outside the combinational sweep, so they belong to no supernode; their
changes activate the supernodes of their consumers directly.
"""

from __future__ import annotations

import enum
from collections import Counter, defaultdict
from dataclasses import dataclass, field

from .ir.graph import NodeKind, RtlGraph

SOURCE_KINDS = (NodeKind.INPUT, NodeKind.REG_READ)
DEFAULT_MAX_SIZE = 35


class FuseReason(enum.Enum):
    OUT_DEGREE_ONE = "OutDegreeOne"
    IN_DEGREE_ONE = "InDegreeOne"
    SIBLINGS = "Siblings"


@dataclass
class PreGroup:
    members: list[int]
    reason: FuseReason | None = None


@dataclass
class SupernodePlan:
    node_to_sn: dict[int, int]
    members: list[list[int]]                 # per supernode, topological order
    succs: list[list[int]] = field(default_factory=list)
    word_bits: int = 64

    def __len__(self) -> int:
        return len(self.members)

    @property
    def sizes(self) -> list[int]:
        return [len(m) for m in self.members]

    def cut_size(self, g: RtlGraph) -> int:
        return cut_size(g, self.node_to_sn)

    def summary(self, g: RtlGraph) -> dict:
        hist = Counter(self.sizes)
        return {"supernodes": len(self), "cut_size": self.cut_size(g),
                "size_histogram": {str(k): hist[k] for k in sorted(hist)}}


def evaluated_nodes(g: RtlGraph) -> list[int]:
    return [k for k in g.topo_order() if g[k].kind not in SOURCE_KINDS]


def cut_size(g: RtlGraph, assign: dict[int, int]) -> int:
    return sum(1 for v, ps in g.preds().items() if v in assign
               for u in ps if u in assign and assign[u] != assign[v])


class _UnionFind:
    def __init__(self, items):
        self.parent = {i: i for i in items}
        self.size = {i: 1 for i in items}

    def find(self, x: int) -> int:
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x


class _Contracted:
    """Union-find groups plus the directed multigraph between them."""

    def __init__(self, nodes: list[int], edges: list[tuple[int, int]]):
        self.uf = _UnionFind(nodes)
        self.out: dict[int, Counter] = {n: Counter() for n in nodes}
        self.inn: dict[int, Counter] = {n: Counter() for n in nodes}
        for u, v in edges:
            self.out[u][v] += 1
            self.inn[v][u] += 1
        self.reason: dict[int, FuseReason] = {}

    def reaches(self, src: int, dst: int, skip_direct: bool) -> bool:
        """Is ``dst`` reachable from ``src``; optionally ignore the direct edge."""
        stack = [s for s in self.out[src] if not (skip_direct and s == dst)]
        seen = set(stack)
        while stack:
            x = stack.pop()
            if x == dst:
                return True
            for y in self.out[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return False

    def try_union(self, a: int, b: int, max_size: int, reason: FuseReason) -> bool:
        ra, rb = self.uf.find(a), self.uf.find(b)
        if ra == rb:
            return False
        if self.uf.size[ra] + self.uf.size[rb] > max_size:
            return False
        # fusing creates a cycle iff one reaches the other through a third group
        if self.reaches(ra, rb, True) or self.reaches(rb, ra, True):
            return False
        if self.uf.size[ra] < self.uf.size[rb] or (self.uf.size[ra] == self.uf.size[rb]
                                                   and rb < ra):
            ra, rb = rb, ra
        self.uf.parent[rb] = ra
        self.uf.size[ra] += self.uf.size.pop(rb)
        for x, k in self.out.pop(rb).items():
            self.inn[x][rb] -= k
            if not self.inn[x][rb]:
                del self.inn[x][rb]
            if x != ra:
                self.out[ra][x] += k
                self.inn[x][ra] += k
        for x, k in self.inn.pop(rb).items():
            if x == ra:
                continue
            self.out[x][rb] -= k
            if not self.out[x][rb]:
                del self.out[x][rb]
            self.out[x][ra] += k
            self.inn[ra][x] += k
        self.out[ra].pop(ra, None)
        self.inn[ra].pop(ra, None)
        self.out[ra].pop(rb, None)
        self.inn[ra].pop(rb, None)
        first = self.reason.pop(rb, None)
        self.reason.setdefault(ra, first or reason)
        return True


def _eval_edges(g: RtlGraph, nodes: set[int]) -> list[tuple[int, int]]:
    return [(u, v) for v, ps in g.preds().items() if v in nodes for u in ps if u in nodes]


def pre_group(g: RtlGraph, max_size: int = DEFAULT_MAX_SIZE) -> list[PreGroup]:
    """Fuse out-degree-1, in-degree-1 and same-predecessor sibling nodes."""
    order = evaluated_nodes(g)
    nodes = set(order)
    succs, preds = g.succs(), g.preds()
    c = _Contracted(order, _eval_edges(g, nodes))
    by_id = sorted(order)
    for n in by_id:
        ss = succs[n]
        if len(ss) == 1 and ss[0] in nodes:
            c.try_union(n, ss[0], max_size, FuseReason.OUT_DEGREE_ONE)
    for n in by_id:
        ps = preds[n]
        if len(ps) == 1 and ps[0] in nodes:
            c.try_union(n, ps[0], max_size, FuseReason.IN_DEGREE_ONE)
    siblings: dict[tuple, list[int]] = defaultdict(list)
    for n in by_id:
        if preds[n]:
            siblings[tuple(preds[n])].append(n)
    for key in sorted(siblings):
        group = siblings[key]
        for other in group[1:]:
            c.try_union(group[0], other, max_size, FuseReason.SIBLINGS)
    out: dict[int, list[int]] = defaultdict(list)
    for n in order:
        out[c.uf.find(n)].append(n)
    groups = [PreGroup(m, c.reason.get(r)) for r, m in out.items()]
    pos = {n: i for i, n in enumerate(order)}
    groups.sort(key=lambda pg: pos[pg.members[0]])
    return groups


def singleton_groups(g: RtlGraph) -> list[PreGroup]:
    return [PreGroup([n]) for n in evaluated_nodes(g)]


# refinement ---------------------------------------------------------------------

class _State:
    """Assignment of pre-groups to supernodes with incremental bookkeeping."""

    def __init__(self, g: RtlGraph, groups: list[PreGroup]):
        self.gsize = [len(pg.members) for pg in groups]
        self.node_group = {n: i for i, pg in enumerate(groups) for n in pg.members}
        w_out: list[Counter] = [Counter() for _ in groups]
        for v, ps in g.preds().items():
            gv = self.node_group.get(v)
            if gv is None:
                continue
            for u in ps:
                gu = self.node_group.get(u)
                if gu is not None and gu != gv:
                    w_out[gu][gv] += 1
        self.w_out = w_out
        self.w_in: list[Counter] = [Counter() for _ in groups]
        for a, cnt in enumerate(w_out):
            for b, k in cnt.items():
                self.w_in[b][a] += k
        self.w_und: list[Counter] = [w_out[i] + self.w_in[i] for i in range(len(groups))]
        # registers and inputs each group reads (or, for a register write, the
        # register it feeds); groups sharing one tend to wake together
        self.sources: list[set[int]] = [set() for _ in groups]
        preds = g.preds()
        for n, gi in self.node_group.items():
            self.sources[gi].update(u for u in preds[n] if g[u].kind in SOURCE_KINDS)
            if g[n].kind is NodeKind.REG_WRITE:
                self.sources[gi].add(g[n].partner)
        self.sn_of: list[int] = [-1] * len(groups)
        self.sn_members: dict[int, set[int]] = {}
        self.sn_size: dict[int, int] = {}
        self.sn_out: dict[int, Counter] = {}

    def new_sn(self) -> int:
        s = len(self.sn_members) and max(self.sn_members) + 1
        self.sn_members[s] = set()
        self.sn_size[s] = 0
        self.sn_out[s] = Counter()
        return s

    def place(self, gi: int, s: int) -> None:
        """Move group ``gi`` (possibly unassigned) into supernode ``s``."""
        old = self.sn_of[gi]
        if old == s:
            return
        for h, k in self.w_out[gi].items():
            x = self.sn_of[h]
            if x < 0:
                continue
            if old >= 0 and x != old:
                self._dec(old, x, k)
            if x != s:
                self.sn_out[s][x] += k
        for h, k in self.w_in[gi].items():
            x = self.sn_of[h]
            if x < 0:
                continue
            if old >= 0 and x != old:
                self._dec(x, old, k)
            if x != s:
                self.sn_out[x][s] += k
        if old >= 0:
            self.sn_members[old].discard(gi)
            self.sn_size[old] -= self.gsize[gi]
            if not self.sn_members[old]:
                del self.sn_members[old], self.sn_size[old]
                for cnt in self.sn_out.values():
                    cnt.pop(old, None)
                del self.sn_out[old]
        self.sn_of[gi] = s
        self.sn_members[s].add(gi)
        self.sn_size[s] += self.gsize[gi]

    def _dec(self, a: int, b: int, k: int) -> None:
        cnt = self.sn_out[a]
        cnt[b] -= k
        if cnt[b] <= 0:
            del cnt[b]

    def reaches(self, src, targets: set[int], skip: int | None = None) -> bool:
        stack = [x for x in self.sn_out[src] if x != skip]
        seen = set(stack)
        while stack:
            x = stack.pop()
            if x in targets:
                return True
            for y in self.sn_out[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return False

    def cyclic_at(self, *sns: int) -> bool:
        return any(s in self.sn_out and self.reaches(s, {s}) for s in sns)


def _initial(state: _State, groups: list[PreGroup], order_pos: dict[int, int],
             max_size: int) -> None:
    """Greedy packing in topological order, preferring well-connected supernodes.

    A group joins the supernode holding most of its predecessors, or failing
    that, most of the other readers of the registers and inputs it reads.
    Sources read by more than ``max_size`` groups carry no such preference.
    """
    idx = sorted(range(len(groups)), key=lambda i: order_pos[groups[i].members[0]])
    fanout = Counter(u for srcs in state.sources for u in srcs)
    readers: dict[int, Counter] = defaultdict(Counter)
    for gi in _group_topo(state, idx):
        preds: Counter = Counter()
        for h, k in state.w_in[gi].items():
            if state.sn_of[h] >= 0:
                preds[state.sn_of[h]] += k
        shared: Counter = Counter()
        srcs = [u for u in state.sources[gi] if fanout[u] <= max_size]
        for u in srcs:
            for s_, k in readers[u].items():
                shared[s_] += 1
        cands = set(preds) | set(shared)
        target = -1
        for s in sorted(cands, key=lambda x: (-preds[x], -shared[x], x)):
            if state.sn_size[s] + state.gsize[gi] > max_size:
                continue
            others = set(preds) - {s}
            if others and state.reaches(s, others):
                continue
            target = s
            break
        if target < 0:
            target = state.new_sn()
        state.place(gi, target)
        for u in srcs:
            readers[u][target] += 1


def _group_topo(state: _State, idx: list[int]) -> list[int]:
    import heapq
    rank = {gi: r for r, gi in enumerate(idx)}
    indeg = {gi: len(state.w_in[gi]) for gi in idx}
    heap = [(rank[gi], gi) for gi in idx if indeg[gi] == 0]
    heapq.heapify(heap)
    out = []
    while heap:
        _, gi = heapq.heappop(heap)
        out.append(gi)
        for h in state.w_out[gi]:
            indeg[h] -= 1
            if indeg[h] == 0:
                heapq.heappush(heap, (rank[h], h))
    if len(out) != len(idx):
        raise ValueError("pre-groups form a cycle")
    return out


def _kl_pair(state: _State, a: int, b: int, max_size: int, swap_candidates: int = 8,
             patience: int = 8, max_trials: int = 8) -> int:
    """One Kernighan-Lin pass between supernodes ``a`` and ``b``; returns the gain.

    Steps move or swap whole pre-groups, each locked after it moves; only the
    best prefix with positive gain is kept.  Every step keeps the size cap and
    an acyclic supernode graph, so every prefix is a valid assignment.  The
    pass stops early after ``patience`` steps without a new best prefix, or
    when the ``max_trials`` best candidates of a step all break acyclicity.
    """
    side = {gi: a for gi in state.sn_members[a]}
    side.update({gi: b for gi in state.sn_members[b]})

    def dval(gi: int) -> int:
        s = side[gi]
        total = 0
        for h, k in state.w_und[gi].items():
            hs = side.get(h)
            if hs is not None:
                total += k if hs != s else -k
        return total

    def other(s: int) -> int:
        return b if s == a else a

    def size(s: int) -> int:
        return state.sn_size.get(s, 0)

    d = {gi: dval(gi) for gi in side}
    locked: set[int] = set()
    history: list[list[int]] = []
    total = best = best_len = 0
    while True:
        free = [gi for gi in side if gi not in locked]
        if not free:
            break
        cands = []
        for gi in free:
            if size(other(side[gi])) + state.gsize[gi] <= max_size:
                cands.append((d[gi], (gi,)))
        top_a = sorted((gi for gi in free if side[gi] == a), key=lambda x: (-d[x], x))
        top_b = sorted((gi for gi in free if side[gi] == b), key=lambda x: (-d[x], x))
        for x in top_a[:swap_candidates]:
            for y in top_b[:swap_candidates]:
                dx, dy = state.gsize[x], state.gsize[y]
                if size(a) - dx + dy <= max_size and size(b) - dy + dx <= max_size:
                    cands.append((d[x] + d[y] - 2 * state.w_und[x][y], (x, y)))
        cands.sort(key=lambda c: (-c[0], c[1]))
        chosen = None
        for gain, moved in cands[:max_trials]:
            prev = [side[gi] for gi in moved]
            for gi in moved:
                _restore(state, gi, other(side[gi]))
            if not _cyclic_any(state, a, b):
                chosen = (gain, moved)
                break
            for gi, s in zip(moved, prev):
                _restore(state, gi, s)
        if chosen is None:
            break
        gain, moved = chosen
        touched = set(moved)
        for gi in moved:
            side[gi] = other(side[gi])
            locked.add(gi)
            touched.update(h for h in state.w_und[gi] if h in side)
        for h in touched:
            d[h] = dval(h)
        total += gain
        history.append(list(moved))
        if total > best:
            best, best_len = total, len(history)
        elif len(history) - best_len >= patience:
            break
    for moved in reversed(history[best_len:]):
        for gi in moved:
            side[gi] = other(side[gi])
            _restore(state, gi, side[gi])
    return best


def _cyclic_any(state: _State, a: int, b: int) -> bool:
    return state.cyclic_at(*(s for s in (a, b) if s in state.sn_out))


def _restore(state: _State, gi: int, s: int) -> None:
    if s not in state.sn_members:
        state.sn_members[s] = set()
        state.sn_size[s] = 0
        state.sn_out[s] = Counter()
    state.place(gi, s)


def kernighan_refine(g: RtlGraph, groups: list[PreGroup], max_size: int = DEFAULT_MAX_SIZE,
                     max_passes: int = 10, initial: dict[int, int] | None = None,
                     refine: bool = True) -> SupernodePlan:
    """Pack pre-groups into supernodes, then improve the cut pairwise.

    ``initial`` optionally maps node ids to starting supernode labels (all
    members of a pre-group must share a label); otherwise greedy packing in
    topological order is used.
    """
    order = evaluated_nodes(g)
    pos = {n: i for i, n in enumerate(order)}
    for pg in groups:
        if len(pg.members) > max_size:
            raise ValueError(f"pre-group of {len(pg.members)} nodes exceeds max_size")
    state = _State(g, groups)
    if initial is None:
        _initial(state, groups, pos, max_size)
    else:
        labels: dict[int, int] = {}
        for gi, pg in enumerate(groups):
            lab = {initial[n] for n in pg.members}
            if len(lab) != 1:
                raise ValueError("initial assignment splits a pre-group")
            lab = lab.pop()
            if lab not in labels:
                labels[lab] = state.new_sn()
            state.place(gi, labels[lab])
        if any(sz > max_size for sz in state.sn_size.values()) or _any_cycle(state):
            raise ValueError("initial assignment violates the size cap or acyclicity")
    if refine:
        dirty = set(state.sn_members)
        for _ in range(max_passes):
            pairs = set()
            for s in list(state.sn_out):
                for t in state.sn_out[s]:
                    if s in dirty or t in dirty:
                        pairs.add((min(s, t), max(s, t)))
            gained = 0
            dirty = set()
            for s, t in sorted(pairs):
                if s not in state.sn_members or t not in state.sn_members:
                    continue
                gain = _kl_pair(state, s, t, max_size)
                if gain > 0:
                    gained += gain
                    dirty.update((s, t))
            if gained == 0:
                break
    return _finish(g, groups, state, order)


def _any_cycle(state: _State) -> bool:
    indeg = Counter()
    for s, cnt in state.sn_out.items():
        for t in cnt:
            indeg[t] += 1
    stack = [s for s in state.sn_out if indeg[s] == 0]
    seen = 0
    while stack:
        s = stack.pop()
        seen += 1
        for t in state.sn_out[s]:
            indeg[t] -= 1
            if indeg[t] == 0:
                stack.append(t)
    return seen != len(state.sn_out)


def _finish(g: RtlGraph, groups: list[PreGroup], state: _State,
            order: list[int]) -> SupernodePlan:
    import heapq
    pos = {n: i for i, n in enumerate(order)}
    members: dict[int, list[int]] = defaultdict(list)
    for n in order:
        members[state.sn_of[state.node_group[n]]].append(n)
    first = {s: pos[m[0]] for s, m in members.items()}
    indeg = Counter()
    for s, cnt in state.sn_out.items():
        for t in cnt:
            indeg[t] += 1
    heap = [(first[s], s) for s in members if indeg[s] == 0]
    heapq.heapify(heap)
    topo = []
    while heap:
        _, s = heapq.heappop(heap)
        topo.append(s)
        for t in state.sn_out[s]:
            indeg[t] -= 1
            if indeg[t] == 0:
                heapq.heappush(heap, (first[t], t))
    if len(topo) != len(members):
        raise AssertionError("supernode graph is cyclic")
    renum = {s: i for i, s in enumerate(topo)}
    plan_members = [members[s] for s in topo]
    node_to_sn = {n: renum[s] for s, m in members.items() for n in m}
    succ_sets = [set() for _ in topo]
    succs = g.succs()
    for n, s in node_to_sn.items():
        for v in succs[n]:
            t = node_to_sn.get(v)
            if t is not None and t != s:
                succ_sets[s].add(t)
    return SupernodePlan(node_to_sn, plan_members, [sorted(x) for x in succ_sets])


def plan_active_layout(plan: SupernodePlan, word_bits: int = 64) -> list[tuple[int, int]]:
    """(word, bit) per supernode; consecutive supernodes share words."""
    return [(i // word_bits, i % word_bits) for i in range(len(plan))]


def n_active_words(plan: SupernodePlan, word_bits: int = 64) -> int:
    return -(-len(plan) // word_bits)


def mffc_plan(g: RtlGraph) -> SupernodePlan:
    """Maximal fanout-free cones: each node joins its single consumer's cone."""
    order = evaluated_nodes(g)
    nodes = set(order)
    succs = g.succs()
    root: dict[int, int] = {}
    for n in reversed(order):
        ss = [s for s in succs[n] if s in nodes]
        root[n] = root[ss[0]] if len(ss) == 1 else n
    groups: dict[int, list[int]] = defaultdict(list)
    for n in order:
        groups[root[n]].append(n)
    pgs = [PreGroup(m) for m in groups.values()]
    size = max((len(m) for m in groups.values()), default=1)
    init = {n: r for r, m in groups.items() for n in m}
    return kernighan_refine(g, pgs, size, initial=init, refine=False)


def build_plan(g: RtlGraph, max_size: int = DEFAULT_MAX_SIZE, use_pre_group: bool = True,
               use_kernighan: bool = True) -> SupernodePlan:
    groups = pre_group(g, max_size) if use_pre_group else singleton_groups(g)
    return kernighan_refine(g, groups, max_size, refine=use_kernighan)
