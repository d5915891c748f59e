"""Lower a flattened, when-free AST to an :class:`RtlGraph`."""

from __future__ import annotations

from ..ir import expr as X
from ..ir.graph import Memory, NodeKind, ResetInfo, RtlGraph
from .ast import Circuit, Connect, FirrtlError, Lit, Mem, Node, Prim, Ref, Reg, Type, Wire

_MEM_READ_FIELDS = {"addr", "en", "clk"}
_MEM_WRITE_FIELDS = {"addr", "en", "clk", "data", "mask"}


class _Lowerer:
    def __init__(self, circuit: Circuit, file: str, max_width: int):
        if len(circuit.modules) != 1:
            raise FirrtlError("lower() expects a flattened circuit", 0, 0, file)
        self.module = circuit.main
        self.file = file
        self.max_width = max_width
        self.g = RtlGraph(circuit.name)
        self.ids: dict[str, int] = {}
        self.pending: set[str] = set()
        self.types: dict[str, Type] = {}
        self.line = 0

    def err(self, msg: str, line: int | None = None) -> FirrtlError:
        return FirrtlError(msg, self.line if line is None else line, 1, self.file)

    def declare(self, name: str, kind: NodeKind, typ: Type, line: int) -> int:
        if name in self.ids:
            raise self.err(f"'{name}' is declared twice", line)
        width = typ.bit_width
        if width > self.max_width:
            raise self.err(f"width {width} of '{name}' exceeds the {self.max_width}-bit cap",
                           line)
        node = self.g.add(name, kind, width, typ.signed)
        self.ids[name] = node.id
        self.types[name] = typ
        return node.id

    # expressions -----------------------------------------------------------

    def ref(self, name: str) -> X.Expr:
        if name not in self.ids:
            raise self.err(f"reference to undeclared signal '{name}'")
        if name in self.pending:
            raise self.err(f"'{name}' is used before its declaration")
        n = self.g[self.ids[name]]
        return X.ref(n.id, n.width, n.signed)

    def expr(self, e) -> X.Expr:
        try:
            return self._expr(e)
        except X.WidthError as ex:
            raise self.err(str(ex)) from None

    def _expr(self, e) -> X.Expr:
        if isinstance(e, Ref):
            return self.ref(e.name)
        if isinstance(e, Lit):
            if e.type.width > self.max_width:
                raise self.err(f"literal width {e.type.width} exceeds the cap")
            return X.const(e.value, e.type.width, e.type.signed)
        if not isinstance(e, Prim):
            raise self.err(f"unexpected expression {e!r}")
        args = [self._expr(a) for a in e.args]
        op, c = e.op, e.consts
        mk = lambda o, *a, params=(): X.make(o, *a, params=params, max_width=self.max_width)
        if op == "tail":
            w = args[0].width
            if c[0] >= w:
                raise self.err(f"tail({c[0]}) leaves no bits of a {w}-bit value")
            return mk("bits", args[0], params=(w - c[0] - 1, 0))
        if op == "head":
            w = args[0].width
            if not 0 < c[0] <= w:
                raise self.err(f"head({c[0]}) out of range for a {w}-bit value")
            return mk("bits", args[0], params=(w - 1, w - c[0]))
        if op == "neg":
            a = args[0]
            if a.signed:
                return mk("sub", X.const(0, 1, True), a)
            s = mk("sub", X.const(0, 1, True), mk("cvt", a))
            return mk("asSInt", mk("bits", s, params=(a.width, 0)))
        if op == "validif":
            return args[1]
        if op == "asClock":
            return mk("asUInt", args[0])
        if op == "asAsyncReset":
            raise self.err("unsupported construct 'asAsyncReset'")
        if op in ("pad", "shl", "shr", "bits"):
            return mk(op, *args, params=c)
        if c:
            raise self.err(f"{op} takes no integer arguments")
        return mk(op, *args)

    def fit(self, e: X.Expr, name: str) -> X.Expr:
        """Extend a connected value to its sink's type; narrowing is an error."""
        n = self.g[self.ids[name]]
        if e.signed != n.signed:
            raise self.err(f"cannot connect {'SInt' if e.signed else 'UInt'} value to "
                           f"{'SInt' if n.signed else 'UInt'} signal '{name}'")
        if e.width > n.width:
            raise self.err(f"connecting a {e.width}-bit value to {n.width}-bit '{name}' "
                           "would truncate")
        return X.extend(e, n.width)

    # driver ------------------------------------------------------------------

    def run(self) -> RtlGraph:
        g = self.g
        m = self.module
        body = m.body
        for p in m.ports:
            kind = NodeKind.INPUT if p.direction == "input" else NodeKind.OUTPUT
            self.declare(p.name, kind, p.type, p.line)
        regs: list[Reg] = []
        mems: list[Mem] = []
        deferred_nodes: list[Node] = []
        for s in body:
            if isinstance(s, Wire):
                self.declare(s.name, NodeKind.WIRE, s.type, s.line)
            elif isinstance(s, Reg):
                if s.type.kind not in ("UInt", "SInt"):
                    raise self.err(f"register '{s.name}' must have a UInt or SInt type", s.line)
                rid = self.declare(s.name, NodeKind.REG_READ, s.type, s.line)
                wid = self.declare(s.name + "$next", NodeKind.REG_WRITE, s.type, s.line)
                g[rid].partner, g[wid].partner = wid, rid
                regs.append(s)
            elif isinstance(s, Node):
                # the type is known only once the expression is converted
                if s.name in self.ids:
                    raise self.err(f"'{s.name}' is declared twice", s.line)
                nid = g.add(s.name, NodeKind.WIRE, 1).id
                self.ids[s.name] = nid
                self.pending.add(s.name)
                deferred_nodes.append(s)
            elif isinstance(s, Mem):
                mems.append(s)
                mid = len(g.mems)
                g.mems[mid] = Memory(mid, s.name, s.type.bit_width, s.depth, s.type.signed)
                for r in s.readers:
                    nid = self.declare(f"{s.name}.{r}.data", NodeKind.MEM, s.type, s.line)
                    g[nid].mem = mid
                    g.mems[mid].readers.append(nid)
                for w in s.writers:
                    nid = self.declare(f"{s.name}.{w}", NodeKind.MEM, Type("UInt", 1), s.line)
                    g[nid].mem = mid
                    g.mems[mid].writers.append(nid)

        connects: dict[str, Connect] = {}
        for s in body:
            if isinstance(s, Connect):
                connects[s.loc] = s

        # node declarations may reference each other in source order
        for s in deferred_nodes:
            self.line = s.line
            e = self.expr(s.expr)
            n = g[self.ids[s.name]]
            n.width, n.signed, n.expr = e.width, e.signed, e
            self.types[s.name] = Type("SInt" if e.signed else "UInt", e.width)
            self.pending.discard(s.name)

        mem_fields: dict[str, Connect] = {}
        for loc, s in connects.items():
            self.line = s.line
            if loc in self.ids:
                n = g[self.ids[loc]]
                if n.kind in (NodeKind.INPUT, NodeKind.REG_WRITE, NodeKind.MEM) or \
                        (n.kind is NodeKind.WIRE and n.expr is not None):
                    raise self.err(f"cannot connect to '{loc}'")
                if n.kind is NodeKind.REG_READ:
                    continue
                typ = self.types[loc]
                if typ.kind in ("Clock", "AsyncReset"):
                    e = self.expr(s.expr)
                    n.expr = X.extend(e, 1) if e.width == 1 else X.bits(e, 0, 0)
                    n.signed = False
                    continue
                n.expr = self.fit(self.expr(s.expr), loc)
            elif loc.count(".") == 2:
                mem_fields[loc] = s
            else:
                raise self.err(f"connect to undeclared signal '{loc}'")

        for n in g.nodes.values():
            if n.kind in (NodeKind.OUTPUT, NodeKind.WIRE) and n.expr is None:
                raise self.err(f"signal '{n.name}' is never connected", 0)

        for r in regs:
            self.line = r.line
            rd = g[self.ids[r.name]]
            wr = g[rd.partner]
            c = connects.get(r.name)
            nxt = self.fit(self.expr(c.expr), r.name) if c else X.ref(rd.id, rd.width, rd.signed)
            if r.reset is None:
                wr.expr = nxt
                continue
            rst = self.expr(r.reset)
            if rst.width != 1 or rst.signed:
                raise self.err(f"reset of register '{r.name}' must be 1 bit wide")
            if rst.is_const(0):
                wr.expr = nxt
                continue
            init = self.fit(self.expr(r.init), r.name)
            if rst.op != "ref":
                rn = g.add(r.name + "$rst", NodeKind.WIRE, 1, False, rst)
                self.ids[rn.name] = rn.id
                rst = X.ref(rn.id, 1)
            wr.expr = X.make("mux", rst, init, nxt)
            wr.reset = ResetInfo(rst, init)

        for s in mems:
            mem = next(mm for mm in g.mems.values() if mm.name == s.name)
            aw = max(1, (s.depth - 1).bit_length())
            for port, nid in zip(s.readers, mem.readers):
                self.line = s.line
                addr = self._mem_field(mem_fields, s.name, port, "addr")
                e = X.make("memread", addr, params=(mem.id, mem.width, mem.depth))
                if mem.signed:
                    e = X.make("asSInt", e)
                g[nid].expr = e
            for port, nid in zip(s.writers, mem.writers):
                addr = self._mem_field(mem_fields, s.name, port, "addr")
                data = self._mem_field(mem_fields, s.name, port, "data")
                en = self._mem_field(mem_fields, s.name, port, "en")
                mask = self._mem_field(mem_fields, s.name, port, "mask")
                if data.signed != mem.signed or data.width > mem.width:
                    raise self.err(f"data connected to '{s.name}.{port}' does not match the "
                                   "memory type")
                data = X.make("asUInt", X.extend(data, mem.width))
                valid = X.make("and", en, mask)
                if addr.width < aw:
                    addr = X.extend(addr, aw)
                e = X.make("memwrite", valid, addr, data, params=(mem.id,))
                g[nid].expr = e
                g[nid].width = e.width
            for loc in list(mem_fields):
                head, port, field = loc.split(".")
                if head == s.name:
                    ok = (port in s.readers and field in _MEM_READ_FIELDS) or \
                         (port in s.writers and field in _MEM_WRITE_FIELDS)
                    if not ok:
                        raise self.err(f"unknown memory port field '{loc}'",
                                       mem_fields[loc].line)
                    del mem_fields[loc]
        if mem_fields:
            loc, c = next(iter(mem_fields.items()))
            raise self.err(f"connect to undeclared signal '{loc}'", c.line)

        for name, nid in self.ids.items():
            if name.endswith("$next") or name.endswith("$rst") or nid not in g.nodes:
                continue
            n = g[nid]
            if n.is_mem_write:
                continue
            g.probes[name] = X.ref(nid, n.width, n.signed)
        for p in m.ports:
            if p.direction != "input":
                continue
            used_as_reset = any(w.reset is not None and w.reset.signal.node == self.ids[p.name]
                                for w in g.nodes.values())
            if used_as_reset or p.name == "reset" or p.type.kind == "Reset":
                g.reset_inputs.append(p.name)
        g.topo_order()
        return g

    def _mem_field(self, fields: dict, mem: str, port: str, field: str) -> X.Expr:
        c = fields.get(f"{mem}.{port}.{field}")
        if c is None:
            raise self.err(f"memory port field '{mem}.{port}.{field}' is never connected")
        self.line = c.line
        e = self.expr(c.expr)
        if field in ("en", "mask"):
            if e.width != 1:
                raise self.err(f"'{mem}.{port}.{field}' must be 1 bit wide")
        elif e.signed and field == "addr":
            raise self.err(f"'{mem}.{port}.addr' must be UInt")
        return e


def lower(circuit: Circuit, file: str = "<input>", max_width: int = X.MAX_WIDTH) -> RtlGraph:
    """Build the RTL graph of a flattened circuit.

    Raises :class:`FirrtlError` for type and connection errors and
    :class:`~actsim.ir.graph.CycleError` for combinational loops.
    """
    return _Lowerer(circuit, file, max_width).run()
