"""Print an AST back to FIRRTL text that :func:`parse` accepts."""

from __future__ import annotations

from .ast import (Circuit, Connect, Inst, Invalidate, Lit, Mem, Module, Node, Prim, Ref, Reg,
                  Type, When, Wire)


def print_type(t: Type) -> str:
    return f"{t.kind}<{t.width}>" if t.kind in ("UInt", "SInt") else t.kind


def print_expr(e) -> str:
    if isinstance(e, Ref):
        return e.name
    if isinstance(e, Lit):
        return f"{print_type(e.type)}({e.value})"
    if isinstance(e, Prim):
        parts = [print_expr(a) for a in e.args] + [str(c) for c in e.consts]
        return f"{e.op}({', '.join(parts)})"
    raise TypeError(f"cannot print {e!r}")


def _stmts(body: list, indent: str, out: list[str]) -> None:
    for s in body:
        if isinstance(s, Wire):
            out.append(f"{indent}wire {s.name} : {print_type(s.type)}")
        elif isinstance(s, Reg):
            line = f"{indent}reg {s.name} : {print_type(s.type)}, {print_expr(s.clock)}"
            if s.reset is not None:
                line += f" with : (reset => ({print_expr(s.reset)}, {print_expr(s.init)}))"
            out.append(line)
        elif isinstance(s, Node):
            out.append(f"{indent}node {s.name} = {print_expr(s.expr)}")
        elif isinstance(s, Connect):
            out.append(f"{indent}{s.loc} <= {print_expr(s.expr)}")
        elif isinstance(s, Invalidate):
            out.append(f"{indent}{s.loc} is invalid")
        elif isinstance(s, Inst):
            out.append(f"{indent}inst {s.name} of {s.module}")
        elif isinstance(s, Mem):
            out.append(f"{indent}mem {s.name} :")
            sub = indent + "  "
            out.append(f"{sub}data-type => {print_type(s.type)}")
            out.append(f"{sub}depth => {s.depth}")
            out.append(f"{sub}read-latency => {s.read_latency}")
            out.append(f"{sub}write-latency => {s.write_latency}")
            out += [f"{sub}reader => {r}" for r in s.readers]
            out += [f"{sub}writer => {w}" for w in s.writers]
        elif isinstance(s, When):
            out.append(f"{indent}when {print_expr(s.cond)} :")
            _stmts(s.then or [], indent + "  ", out)
            if not s.then:
                out.append(f"{indent}  skip")
            if s.otherwise:
                out.append(f"{indent}else :")
                _stmts(s.otherwise, indent + "  ", out)
        else:
            raise TypeError(f"cannot print {s!r}")


def print_module(m: Module, indent: str = "  ") -> list[str]:
    out = [f"{indent}module {m.name} :"]
    inner = indent + "  "
    for p in m.ports:
        out.append(f"{inner}{p.direction} {p.name} : {print_type(p.type)}")
    _stmts(m.body, inner, out)
    if not m.body and not m.ports:
        out.append(f"{inner}skip")
    return out


def print_circuit(c: Circuit) -> str:
    out = [f"circuit {c.name} :"]
    for m in c.modules:
        out += print_module(m)
    return "\n".join(out) + "\n"
