"""Inline the instance hierarchy into a single module.

Child signals are renamed ``<inst>$<name>``; each instance port becomes a wire
``<inst>$<port>`` so parent connects to ``inst.port`` keep working.
"""

from __future__ import annotations

from .ast import (Circuit, Connect, FirrtlError, Inst, Invalidate, Lit, Mem, Module, Node,
                  Prim, Ref, Reg, Wire)


def _rename_expr(e, rn):
    if isinstance(e, Ref):
        return Ref(rn(e.name))
    if isinstance(e, Prim):
        return Prim(e.op, tuple(_rename_expr(a, rn) for a in e.args), e.consts)
    if e is None or isinstance(e, Lit):
        return e
    raise TypeError(f"unexpected expression {e!r}")


def _expand(circuit: Circuit, module: Module, prefix: str, stack: tuple, file: str) -> list:
    insts = {s.name: s for s in module.body if isinstance(s, Inst)}
    mems = {s.name for s in module.body if isinstance(s, Mem)}

    def rn(name: str) -> str:
        head, _, rest = name.partition(".")
        if rest and head in insts:
            return f"{prefix}{head}${rest}"
        if rest and head not in mems:
            raise FirrtlError(f"'{head}' is not an instance or memory", 0, 0, file)
        return prefix + name

    out: list = []
    for s in module.body:
        if isinstance(s, Inst):
            if s.module in stack or s.module == module.name:
                raise FirrtlError(f"recursive instantiation of module '{s.module}'",
                                  s.line, 1, file)
            try:
                child = circuit.module(s.module)
            except KeyError:
                raise FirrtlError(f"instance '{s.name}' of undeclared module '{s.module}'",
                                  s.line, 1, file) from None
            cp = f"{prefix}{s.name}$"
            for p in child.ports:
                out.append(Wire(cp + p.name, p.type, s.line))
            out += _expand(circuit, child, cp, stack + (module.name,), file)
        elif isinstance(s, Wire):
            out.append(Wire(prefix + s.name, s.type, s.line))
        elif isinstance(s, Reg):
            out.append(Reg(prefix + s.name, s.type, _rename_expr(s.clock, rn),
                           _rename_expr(s.reset, rn), _rename_expr(s.init, rn), s.line))
        elif isinstance(s, Node):
            out.append(Node(prefix + s.name, _rename_expr(s.expr, rn), s.line))
        elif isinstance(s, Mem):
            out.append(Mem(prefix + s.name, s.type, s.depth, list(s.readers), list(s.writers),
                           s.read_latency, s.write_latency, s.line))
        elif isinstance(s, Connect):
            out.append(Connect(rn(s.loc), _rename_expr(s.expr, rn), s.line))
        elif isinstance(s, Invalidate):
            pass
        else:
            raise FirrtlError(f"unexpected statement {type(s).__name__} while flattening",
                              getattr(s, "line", 0), 1, file)
    return out


def flatten(circuit: Circuit, file: str = "<input>") -> Circuit:
    """Return a circuit with a single module: the main module, fully inlined."""
    main = circuit.main
    body = _expand(circuit, main, "", (), file)
    flat = Module(main.name, list(main.ports), body, main.line)
    return Circuit(circuit.name, [flat], list(circuit.diagnostics))
