"""The RTL graph shared by every pass, the oracle and the engine."""

from __future__ import annotations

import enum
import heapq
from dataclasses import dataclass, field, replace

from .expr import Expr, refs, substitute, to_sexpr


class NodeKind(enum.Enum):
    INPUT = "Input"
    OUTPUT = "Output"
    WIRE = "Wire"
    REG_READ = "RegisterRead"
    REG_WRITE = "RegisterWrite"
    MEM = "MemNode"


class CycleError(ValueError):
    """A combinational loop was found."""

    def __init__(self, names: list[str]):
        self.names = names
        super().__init__("combinational loop through " + " -> ".join(names))


@dataclass
class ResetInfo:
    signal: Expr   # ref to the 1-bit reset node
    init: Expr


@dataclass
class Memory:
    id: int
    name: str
    width: int
    depth: int
    signed: bool = False
    readers: list[int] = field(default_factory=list)
    writers: list[int] = field(default_factory=list)


@dataclass
class RtlNode:
    id: int
    name: str
    kind: NodeKind
    width: int
    signed: bool = False
    expr: Expr | None = None
    partner: int | None = None      # the other half of a register pair
    reset: ResetInfo | None = None  # RegisterWrite only
    mem: int | None = None          # MemNode only
    seq: float = 0.0                # source order, used for deterministic tie-breaks

    @property
    def is_mem_write(self) -> bool:
        return self.kind is NodeKind.MEM and self.expr is not None and self.expr.op == "memwrite"

    @property
    def is_mem_read(self) -> bool:
        return self.kind is NodeKind.MEM and self.expr is not None and self.expr.op == "memread"

    def exprs(self) -> list[Expr]:
        out = [] if self.expr is None else [self.expr]
        if self.reset is not None:
            out += [self.reset.signal, self.reset.init]
        return out


class RtlGraph:
    def __init__(self, name: str = "top"):
        self.name = name
        self.nodes: dict[int, RtlNode] = {}
        self.mems: dict[int, Memory] = {}
        self.probes: dict[str, Expr] = {}
        self.reset_inputs: list[str] = []
        self._next = 0
        self._succs: dict[int, list[int]] | None = None
        self._preds: dict[int, list[int]] | None = None

    # construction -------------------------------------------------------

    def add(self, name: str, kind: NodeKind, width: int, signed: bool = False,
            expr: Expr | None = None, seq: float | None = None, **kw) -> RtlNode:
        nid = self._next
        self._next += 1
        node = RtlNode(nid, name, kind, width, signed, expr,
                       seq=float(nid) if seq is None else seq, **kw)
        self.nodes[nid] = node
        self.touch()
        return node

    def copy(self) -> "RtlGraph":
        g = RtlGraph(self.name)
        g.nodes = {k: replace(n, reset=replace(n.reset) if n.reset else None)
                   for k, n in self.nodes.items()}
        g.mems = {k: replace(m, readers=list(m.readers), writers=list(m.writers))
                  for k, m in self.mems.items()}
        g.probes = dict(self.probes)
        g.reset_inputs = list(self.reset_inputs)
        g._next = self._next
        return g

    def touch(self) -> None:
        self._succs = self._preds = None

    def remove(self, ids) -> None:
        for nid in ids:
            node = self.nodes.pop(nid)
            if node.mem is not None and node.mem in self.mems:
                m = self.mems[node.mem]
                for lst in (m.readers, m.writers):
                    if nid in lst:
                        lst.remove(nid)
                if not m.readers and not m.writers:
                    del self.mems[node.mem]
        self.touch()

    def substitute(self, mapping: dict[int, Expr]) -> None:
        """Replace references to the mapped nodes everywhere, probes included."""
        if not mapping:
            return
        for n in self.nodes.values():
            if n.expr is not None:
                n.expr = substitute(n.expr, mapping)
            if n.reset is not None:
                n.reset.signal = substitute(n.reset.signal, mapping)
                n.reset.init = substitute(n.reset.init, mapping)
        for k, e in self.probes.items():
            self.probes[k] = substitute(e, mapping)
        self.touch()

    def prune_probes(self) -> None:
        self.probes = {k: e for k, e in self.probes.items()
                       if all(r in self.nodes for r in refs(e))}

    # queries ------------------------------------------------------------

    def __len__(self) -> int:
        return len(self.nodes)

    def __iter__(self):
        return iter(self.nodes.values())

    def __getitem__(self, nid: int) -> RtlNode:
        return self.nodes[nid]

    def by_name(self, name: str) -> RtlNode:
        for n in self.nodes.values():
            if n.name == name:
                return n
        raise KeyError(name)

    def of_kind(self, *kinds: NodeKind) -> list[RtlNode]:
        return [n for n in self.nodes.values() if n.kind in kinds]

    def _build_edges(self) -> None:
        succs: dict[int, set[int]] = {k: set() for k in self.nodes}
        preds: dict[int, list[int]] = {}
        for n in self.nodes.values():
            ps = sorted(refs(n.expr)) if n.expr is not None else []
            preds[n.id] = ps
            for p in ps:
                succs[p].add(n.id)
        key = self._key
        self._succs = {k: sorted(v, key=key) for k, v in succs.items()}
        self._preds = preds

    def _key(self, nid: int) -> tuple[float, int]:
        return (self.nodes[nid].seq, nid)

    def succs(self) -> dict[int, list[int]]:
        """Combinational successors (register and memory write→read excluded)."""
        if self._succs is None:
            self._build_edges()
        return self._succs

    def preds(self) -> dict[int, list[int]]:
        if self._preds is None:
            self._build_edges()
        return self._preds

    def edge_count(self) -> int:
        return sum(len(v) for v in self.preds().values())

    def topo_order(self) -> list[int]:
        """Kahn's algorithm, ties broken by source order."""
        preds, succs = self.preds(), self.succs()
        indeg = {k: len(v) for k, v in preds.items()}
        heap = [self._key(k) for k, d in indeg.items() if d == 0]
        heapq.heapify(heap)
        order = []
        while heap:
            _, nid = heapq.heappop(heap)
            order.append(nid)
            for s in succs[nid]:
                indeg[s] -= 1
                if indeg[s] == 0:
                    heapq.heappush(heap, self._key(s))
        if len(order) != len(self.nodes):
            raise CycleError(self._find_cycle({k for k, d in indeg.items() if d > 0}))
        return order

    def _find_cycle(self, remaining: set[int]) -> list[str]:
        preds = self.preds()
        start = min(remaining)
        seen: dict[int, int] = {}
        path = []
        cur = start
        while cur not in seen:
            seen[cur] = len(path)
            path.append(cur)
            cur = next(p for p in preds[cur] if p in remaining)
        cycle = path[seen[cur]:]
        cycle.reverse()
        return [self.nodes[c].name for c in cycle]

    def dump(self) -> str:
        succs = self.succs()
        lines = []
        for n in self.nodes.values():
            ex = to_sexpr(n.expr) if n.expr is not None else "-"
            lines.append(f"{n.id} {n.kind.value} {n.width} {ex} "
                         f"succ=[{','.join(map(str, succs[n.id]))}]")
        return "\n".join(lines)

    def check(self) -> None:
        """Assert structural invariants; used by tests and after passes."""
        for n in self.nodes.values():
            for e in n.exprs():
                for r in refs(e):
                    assert r in self.nodes, f"{n.name} references missing node {r}"
            if n.kind in (NodeKind.REG_READ, NodeKind.REG_WRITE):
                other = self.nodes[n.partner]
                assert other.partner == n.id and other.kind is not n.kind
            if n.expr is not None and n.kind is not NodeKind.MEM:
                assert n.expr.width == n.width and n.expr.signed == n.signed, n.name
        succs, preds = self.succs(), self.preds()
        for k, ss in succs.items():
            for s in ss:
                assert k in preds[s]
        self.topo_order()
