"""Parser for the scalar LoFIRRTL-like subset.

``parse`` returns a :class:`Circuit` whose modules contain no ``when`` blocks:
conditional connects are folded into ``mux``/``validif`` expressions with
last-connect-wins semantics, and declarations nested in ``when`` bodies are
hoisted in statement order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .ast import (Circuit, Connect, Diagnostic, FirrtlError, Inst, Invalidate, Lit, Mem,
                  Module, Node, Port, Prim, Ref, Reg, Type, When, Wire)

PRIMS = {
    "add", "sub", "mul", "div", "rem", "lt", "leq", "gt", "geq", "eq", "neq", "pad",
    "asUInt", "asSInt", "asClock", "asAsyncReset", "cvt", "neg", "not", "and", "or", "xor",
    "andr", "orr", "xorr", "cat", "bits", "head", "tail", "shl", "shr", "dshl", "dshr",
    "mux", "validif",
}
DROPPED = {"stop", "printf", "assert", "assume", "cover"}
UNSUPPORTED = {"attach", "cmem", "smem", "mport", "read", "write", "infer", "rdwr",
               "extmodule", "intmodule", "define", "propassign", "layerblock", "match"}

_TOKEN = re.compile(r"""
    (?P<ws>[ \t]+)
  | (?P<comment>;.*)
  | (?P<info>@\[[^\]]*\])
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<num>-?(?:0[xhbo][0-9a-fA-F_]+|\d+))
  | (?P<op><=|<-|=>|[<>(){}\[\]:,=.])
  | (?P<id>[A-Za-z_][A-Za-z0-9_$-]*)
""", re.VERBOSE)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


@dataclass
class Line:
    indent: int
    tokens: list[Token]
    lineno: int


def _lex(text: str, file: str) -> list[Line]:
    lines = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        raw = raw.replace("\t", "    ")
        stripped = raw.lstrip(" ")
        indent = len(raw) - len(stripped)
        pos, toks = indent, []
        while pos < len(raw):
            m = _TOKEN.match(raw, pos)
            if not m:
                raise FirrtlError(f"unexpected character {raw[pos]!r}", lineno, pos + 1, file)
            kind = m.lastgroup
            if kind not in ("ws", "comment", "info"):
                toks.append(Token(kind, m.group(), lineno, pos + 1))
            pos = m.end()
        if toks:
            lines.append(Line(indent, toks, lineno))
    return lines


class _Cursor:
    def __init__(self, line: Line, file: str):
        self.toks = line.tokens
        self.pos = 0
        self.line = line
        self.file = file

    def error(self, msg: str, tok: Token | None = None) -> FirrtlError:
        tok = tok or (self.toks[self.pos] if self.pos < len(self.toks) else self.toks[-1])
        col = tok.col if self.pos < len(self.toks) else tok.col + len(tok.text)
        return FirrtlError(msg, tok.line, col, self.file)

    def peek(self, k: int = 0) -> Token | None:
        i = self.pos + k
        return self.toks[i] if i < len(self.toks) else None

    def at_end(self) -> bool:
        return self.pos >= len(self.toks)

    def next(self) -> Token:
        if self.at_end():
            raise self.error("unexpected end of line")
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def accept(self, text: str) -> bool:
        t = self.peek()
        if t is not None and t.text == text:
            self.pos += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        t = self.peek()
        if t is None or t.text != text:
            got = "end of line" if t is None else repr(t.text)
            raise self.error(f"expected {text!r}, got {got}")
        self.pos += 1
        return t

    def ident(self) -> str:
        t = self.next()
        if t.kind != "id":
            self.pos -= 1
            raise self.error(f"expected identifier, got {t.text!r}")
        return t.text

    def integer(self) -> int:
        t = self.next()
        if t.kind != "num":
            self.pos -= 1
            raise self.error(f"expected integer, got {t.text!r}")
        return _parse_int(t.text)

    def done(self) -> None:
        if not self.at_end():
            raise self.error(f"unexpected token {self.peek().text!r}")


def _parse_int(text: str) -> int:
    neg = text.startswith("-")
    body = text[1:] if neg else text
    base = {"h": 16, "x": 16, "b": 2, "o": 8}
    if len(body) > 1 and body[0] == "0" and body[1] in base:
        v = int(body[2:].replace("_", ""), base[body[1]])
    else:
        v = int(body.replace("_", ""))
    return -v if neg else v


def _parse_lit_string(s: str) -> int:
    s = s.strip('"')
    neg = s.startswith("-")
    if neg:
        s = s[1:]
    base = {"h": 16, "b": 2, "o": 8}
    if s and s[0] in base:
        v = int(s[1:].replace("_", ""), base[s[0]])
    else:
        v = int(s)
    return -v if neg else v


class _Parser:
    def __init__(self, lines: list[Line], file: str):
        self.lines = lines
        self.i = 0
        self.file = file
        self.diagnostics: list[Diagnostic] = []

    def cursor(self) -> _Cursor:
        return _Cursor(self.lines[self.i], self.file)

    def warn(self, msg: str, tok: Token) -> None:
        self.diagnostics.append(Diagnostic("warning", msg, tok.line, tok.col, self.file))

    # structure ------------------------------------------------------------

    def circuit(self) -> Circuit:
        if not self.lines:
            raise FirrtlError("empty input", 1, 1, self.file)
        c = self.cursor()
        if c.peek().text == "FIRRTL":
            self.i += 1
            c = self.cursor()
        c.expect("circuit")
        name = c.ident()
        c.expect(":")
        c.done()
        top_indent = self.lines[self.i].indent
        self.i += 1
        modules = []
        while self.i < len(self.lines):
            line = self.lines[self.i]
            if line.indent <= top_indent:
                raise self.cursor().error("expected a module inside the circuit")
            modules.append(self.module())
        if not any(m.name == name for m in modules):
            raise FirrtlError(f"circuit {name!r} has no module named {name!r}", 1, 1, self.file)
        return Circuit(name, modules, self.diagnostics)

    def module(self) -> Module:
        c = self.cursor()
        t = c.next()
        if t.text in UNSUPPORTED:
            raise c.error(f"unsupported construct '{t.text}'", t)
        if t.text != "module":
            raise c.error(f"expected 'module', got {t.text!r}", t)
        name = c.ident()
        c.expect(":")
        c.done()
        indent = self.lines[self.i].indent
        lineno = self.lines[self.i].lineno
        self.i += 1
        ports = []
        while self.i < len(self.lines) and self.lines[self.i].indent > indent:
            c = self.cursor()
            if c.peek().text not in ("input", "output"):
                break
            direction = c.next().text
            pname = c.ident()
            c.expect(":")
            ptype = self.type(c)
            c.done()
            ports.append(Port(pname, direction, ptype, self.lines[self.i].lineno))
            self.i += 1
        body = self.block(indent)
        return Module(name, ports, body, lineno)

    def block(self, parent_indent: int) -> list:
        stmts: list = []
        if self.i >= len(self.lines) or self.lines[self.i].indent <= parent_indent:
            return stmts
        indent = self.lines[self.i].indent
        while self.i < len(self.lines):
            line = self.lines[self.i]
            if line.indent <= parent_indent:
                break
            if line.indent != indent:
                raise self.cursor().error("inconsistent indentation")
            self.statement(stmts, indent)
        return stmts

    # statements -----------------------------------------------------------

    def statement(self, out: list, indent: int) -> None:
        c = self.cursor()
        lineno = self.lines[self.i].lineno
        t = c.peek()
        kw = t.text
        if t.kind == "id" and kw in DROPPED and c.peek(1) is not None and c.peek(1).text == "(":
            self.warn(f"'{kw}' statement ignored", t)
            self.i += 1
            return
        if kw in UNSUPPORTED:
            raise c.error(f"unsupported construct '{kw}'", t)
        if kw == "when":
            out.append(self.when(indent))
            return
        if kw == "else":
            raise c.error("'else' without matching 'when'", t)
        if kw == "mem":
            out.append(self.mem(indent))
            return
        self.i += 1
        if kw == "skip":
            c.next()
        elif kw == "wire":
            c.next()
            name = c.ident()
            c.expect(":")
            out.append(Wire(name, self.type(c), lineno))
        elif kw == "reg":
            c.next()
            out.append(self.reg(c, lineno))
        elif kw == "regreset":
            c.next()
            name = c.ident()
            c.expect(":")
            typ = self.type(c)
            c.expect(",")
            clk = self.expr(c)
            c.expect(",")
            rst = self.expr(c)
            c.expect(",")
            init = self.expr(c)
            out.append(Reg(name, typ, clk, rst, init, lineno))
        elif kw == "node":
            c.next()
            name = c.ident()
            c.expect("=")
            out.append(Node(name, self.expr(c), lineno))
        elif kw == "inst":
            c.next()
            name = c.ident()
            c.expect("of")
            out.append(Inst(name, c.ident(), lineno))
        elif kw == "connect" and c.peek(1) is not None and c.peek(1).kind == "id" \
                and c.peek(2) is not None and c.peek(2).text in (",", "."):
            c.next()
            loc = self.loc(c)
            c.expect(",")
            out.append(Connect(loc, self.expr(c), lineno))
        elif kw == "invalidate" and c.peek(1) is not None and c.peek(1).kind == "id":
            c.next()
            out.append(Invalidate(self.loc(c), lineno))
        elif t.kind == "id":
            loc = self.loc(c)
            op = c.next()
            if op.text in ("<=", "<-"):
                out.append(Connect(loc, self.expr(c), lineno))
            elif op.text == "is":
                c.expect("invalid")
                out.append(Invalidate(loc, lineno))
            else:
                raise c.error(f"expected '<=' or 'is invalid', got {op.text!r}", op)
        else:
            raise c.error(f"unexpected token {kw!r}", t)
        c.done()

    def reg(self, c: _Cursor, lineno: int) -> Reg:
        name = c.ident()
        c.expect(":")
        typ = self.type(c)
        c.expect(",")
        clk = self.expr(c)
        rst = init = None
        if c.accept("with"):
            c.expect(":")
            if c.at_end():
                # reset clause on the following, more indented line
                if self.i >= len(self.lines):
                    raise c.error("expected reset clause")
                c.done()
                c = self.cursor()
                self.i += 1
            paren = c.accept("(")
            c.expect("reset")
            c.expect("=>")
            c.expect("(")
            rst = self.expr(c)
            c.expect(",")
            init = self.expr(c)
            c.expect(")")
            if paren:
                c.expect(")")
        if typ.kind == "AsyncReset" or (rst is not None and isinstance(rst, Prim)
                                        and rst.op == "asAsyncReset"):
            raise c.error("asynchronous reset is not supported")
        c.done()
        return Reg(name, typ, clk, rst, init, lineno)

    def when(self, indent: int) -> When:
        c = self.cursor()
        lineno = self.lines[self.i].lineno
        c.expect("when")
        cond = self.expr(c)
        c.expect(":")
        self.i += 1
        then: list = []
        if not c.at_end():
            self._inline_statement(c, then, indent)
        then += self.block(indent)
        otherwise: list = []
        if self.i < len(self.lines) and self.lines[self.i].indent == indent:
            c2 = self.cursor()
            if c2.peek().text == "else":
                c2.next()
                if c2.peek() is not None and c2.peek().text == "when":
                    # else when: rewrite the current line as a nested when
                    line = self.lines[self.i]
                    self.lines[self.i] = Line(indent, line.tokens[1:], line.lineno)
                    otherwise = [self.when(indent)]
                else:
                    c2.expect(":")
                    self.i += 1
                    if not c2.at_end():
                        self._inline_statement(c2, otherwise, indent)
                    otherwise += self.block(indent)
        return When(cond, then, otherwise, lineno)

    def _inline_statement(self, c: _Cursor, out: list, indent: int) -> None:
        rest = Line(indent + 1, c.toks[c.pos:], c.line.lineno)
        saved_lines, saved_i = self.lines, self.i
        self.lines, self.i = [rest], 0
        try:
            self.statement(out, indent + 1)
        finally:
            self.lines, self.i = saved_lines, saved_i

    def mem(self, indent: int) -> Mem:
        c = self.cursor()
        lineno = self.lines[self.i].lineno
        c.expect("mem")
        name = c.ident()
        c.expect(":")
        c.done()
        self.i += 1
        typ, depth, rl, wl = None, None, 0, 1
        readers, writers = [], []
        while self.i < len(self.lines) and self.lines[self.i].indent > indent:
            c = self.cursor()
            key = c.next()
            c.expect("=>")
            k = key.text
            if k == "data-type":
                typ = self.type(c)
            elif k == "depth":
                depth = c.integer()
            elif k == "read-latency":
                rl = c.integer()
            elif k == "write-latency":
                wl = c.integer()
            elif k == "reader":
                readers.append(c.ident())
            elif k == "writer":
                writers.append(c.ident())
            elif k == "read-under-write":
                c.ident()
            elif k == "readwriter":
                raise c.error("unsupported construct 'readwriter'", key)
            else:
                raise c.error(f"unknown memory field {k!r}", key)
            c.done()
            self.i += 1
        if typ is None or depth is None:
            raise FirrtlError(f"memory {name!r} needs data-type and depth", lineno, 1, self.file)
        if rl != 0 or wl != 1:
            raise FirrtlError(f"memory {name!r}: only read-latency 0 / write-latency 1 "
                              "is supported", lineno, 1, self.file)
        return Mem(name, typ, depth, readers, writers, rl, wl, lineno)

    # pieces ---------------------------------------------------------------

    def type(self, c: _Cursor) -> Type:
        t = c.next()
        if t.text == "{":
            raise c.error("unsupported construct 'bundle type'", t)
        if t.text in ("UInt", "SInt"):
            width = None
            if c.accept("<"):
                width = c.integer()
                c.expect(">")
            if width is None:
                raise c.error(f"{t.text} without an explicit width (width inference "
                              "is not supported)", t)
            if width < 1:
                raise c.error("widths must be positive", t)
            typ = Type(t.text, width)
        elif t.text in ("Clock", "Reset", "AsyncReset"):
            typ = Type(t.text)
        else:
            raise c.error(f"unknown type {t.text!r}", t)
        if c.peek() is not None and c.peek().text == "[":
            raise c.error("unsupported construct 'vector type'")
        return typ

    def loc(self, c: _Cursor) -> str:
        parts = [c.ident()]
        while c.accept("."):
            parts.append(c.ident())
        if c.peek() is not None and c.peek().text == "[":
            raise c.error("unsupported construct 'subaccess'")
        return ".".join(parts)

    def expr(self, c: _Cursor):
        t = c.peek()
        if t is None:
            raise c.error("expected expression")
        if t.text in ("UInt", "SInt") and c.peek(1) is not None and c.peek(1).text in ("<", "("):
            c.next()
            width = None
            if c.accept("<"):
                width = c.integer()
                c.expect(">")
            c.expect("(")
            v = c.next()
            if v.kind == "string":
                value = _parse_lit_string(v.text)
            elif v.kind == "num":
                value = _parse_int(v.text)
            else:
                raise c.error("expected literal value", v)
            c.expect(")")
            signed = t.text == "SInt"
            if width is None:
                width = max(1, value.bit_length() + (1 if signed else 0))
                if signed and value < 0:
                    width = (-value - 1).bit_length() + 1
            return Lit(Type(t.text, width), value)
        if t.kind == "id" and t.text in PRIMS and c.peek(1) is not None and c.peek(1).text == "(":
            c.next()
            c.next()
            args, consts = [], []
            if not c.accept(")"):
                while True:
                    nt = c.peek()
                    if nt is not None and nt.kind == "num":
                        consts.append(c.integer())
                    else:
                        if consts:
                            raise c.error("expression after integer argument")
                        args.append(self.expr(c))
                    if c.accept(")"):
                        break
                    c.expect(",")
            return Prim(t.text, tuple(args), tuple(consts))
        if t.kind == "id":
            return Ref(self.loc(c))
        raise c.error(f"unexpected token {t.text!r} in expression")


def parse(text: str, file: str = "<input>") -> Circuit:
    """Parse FIRRTL source; ``when`` blocks are normalized into muxes."""
    p = _Parser(_lex(text, file), file)
    circuit = p.circuit()
    for m in circuit.modules:
        m.body = normalize_whens(m)
    return circuit


# when normalization ---------------------------------------------------------

_UNSET = object()


def normalize_whens(module: Module) -> list:
    """Hoist declarations and fold conditional connects (last connect wins).

    A register not connected on some path holds its value; any other sink
    connected on only some paths becomes ``validif(cond, value)``.
    """
    regs = set()

    def collect(stmts):
        for s in stmts:
            if isinstance(s, Reg):
                regs.add(s.name)
            elif isinstance(s, When):
                collect(s.then)
                collect(s.otherwise)

    collect(module.body)
    decls: list = []
    order: list[str] = []
    lines: dict[str, int] = {}

    def base(env, k):
        if k in env:
            return env[k]
        return Ref(k) if k in regs else None

    def merge(cond, a, b):
        if a is b or a == b:
            return a
        if a is None:
            return Prim("validif", (Prim("eq", (cond, Lit(Type("UInt", 1), 0))), b))
        if b is None:
            return Prim("validif", (cond, a))
        return Prim("mux", (cond, a, b))

    def run(stmts, env):
        for s in stmts:
            if isinstance(s, Connect):
                if s.loc not in lines:
                    order.append(s.loc)
                    lines[s.loc] = s.line
                env[s.loc] = s.expr
            elif isinstance(s, Invalidate):
                pass
            elif isinstance(s, When):
                t = run(s.then, dict(env))
                e = run(s.otherwise, dict(env))
                for k in list(t) + [k for k in e if k not in t]:
                    tv, ev = base(t, k), base(e, k)
                    if tv is None and ev is None:
                        continue
                    env[k] = merge(s.cond, tv, ev)
            else:
                decls.append(s)
        return env

    env = run(module.body, {})
    connects = [Connect(k, env[k], lines[k]) for k in order if env.get(k) is not None]
    return decls + connects
