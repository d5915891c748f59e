"""Seeded generator of random, legal, acyclic FIRRTL circuits.

Every circuit has one module with a ``reset`` input that only ever drives
register resets, a handful of data inputs, registers with and without reset,
``node`` statements drawn from every supported primitive, optional wires
assigned under ``when``, and optionally one memory.  Signals stay at most
``max_width`` bits wide so values span one or two machine words.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

BINARY_SAME = ["add", "sub", "mul", "div", "rem", "lt", "leq", "gt", "geq", "eq", "neq",
               "and", "or", "xor"]
UNARY = ["not", "andr", "orr", "xorr", "asUInt", "asSInt", "cvt", "neg"]


@dataclass(frozen=True)
class Sig:
    name: str
    width: int
    signed: bool

    @property
    def type(self) -> str:
        return f"{'SInt' if self.signed else 'UInt'}<{self.width}>"


@dataclass
class GenParams:
    nodes: int = 100
    inputs: int = 6
    registers: int = 12
    outputs: int = 6
    max_width: int = 65
    wires: int = 3
    memory: bool = True
    second_reset: bool = True

    def __post_init__(self):
        for k in ("nodes", "inputs", "registers", "outputs", "max_width"):
            if getattr(self, k) < 1:
                raise ValueError(f"{k} must be positive")


def _width(rng: random.Random, cap: int) -> int:
    r = rng.random()
    if r < 0.25:
        return 1
    if r < 0.7:
        return min(rng.randint(2, 16), cap)
    if r < 0.9:
        return min(rng.randint(17, max(17, min(64, cap))), cap)
    return rng.randint(min(60, cap), cap)


class _Builder:
    def __init__(self, seed: int, p: GenParams):
        self.rng = random.Random(seed)
        self.p = p
        self.pool: list[Sig] = []
        self.body: list[str] = []
        self.count = 0

    def fresh(self, prefix: str) -> str:
        self.count += 1
        return f"{prefix}{self.count}"

    def pick(self, signed: bool | None = None, width1: bool = False) -> tuple[str, Sig]:
        rng = self.rng
        cands = [s for s in self.pool if (signed is None or s.signed == signed)
                 and (not width1 or (s.width == 1 and not s.signed))]
        # recent signals are favoured so chains get deep
        if cands:
            s = cands[-1 - min(int(rng.expovariate(0.15)), len(cands) - 1)] \
                if rng.random() < 0.6 else rng.choice(cands)
            return s.name, s
        base = rng.choice(self.pool)
        if width1:
            return f"orr({base.name})", Sig("", 1, False)
        if signed:
            return f"asSInt({base.name})", Sig("", base.width, True)
        return f"asUInt({base.name})", Sig("", base.width, False)

    def lit(self, width: int, signed: bool) -> str:
        if signed:
            v = self.rng.randint(-(1 << (width - 1)), (1 << (width - 1)) - 1)
            return f"SInt<{width}>({v})"
        v = self.rng.getrandbits(width)
        if self.rng.random() < 0.5:
            return f'UInt<{width}>("h{v:x}")'
        return f"UInt<{width}>({v})"

    def operand(self, signed: bool | None = None, depth: int = 0) -> tuple[str, Sig]:
        rng = self.rng
        if rng.random() < 0.1:
            s = rng.random() < 0.3 if signed is None else signed
            w = _width(rng, self.p.max_width)
            return self.lit(w, s), Sig("", w, s)
        if depth < 2 and rng.random() < 0.25:
            return self.expr(signed, depth + 1)
        return self.pick(signed)

    def clamp(self, text: str, s: Sig) -> tuple[str, Sig]:
        cap = self.p.max_width
        if s.width <= cap:
            return text, s
        lo = self.rng.randint(0, s.width - cap)
        out = f"bits({text}, {lo + cap - 1}, {lo})"
        if s.signed:
            return f"asSInt({out})", Sig("", cap, True)
        return out, Sig("", cap, False)

    def expr(self, signed: bool | None = None, depth: int = 0) -> tuple[str, Sig]:
        text, s = self.clamp(*self._expr(depth))
        if signed is not None and s.signed != signed:
            text = f"asSInt({text})" if signed else f"asUInt({text})"
            s = Sig("", s.width, signed)
        return text, s

    def _expr(self, depth: int) -> tuple[str, Sig]:
        rng = self.rng
        kind = rng.random()
        if kind < 0.35:
            op = rng.choice(BINARY_SAME)
            a, sa = self.operand(None, depth)
            b, sb = self.operand(sa.signed, depth)
            w1, w2, sg = sa.width, sb.width, sa.signed
            if op in ("and", "or", "xor"):
                return f"{op}({a}, {b})", Sig("", max(w1, w2), False)
            if op in ("lt", "leq", "gt", "geq", "eq", "neq"):
                return f"{op}({a}, {b})", Sig("", 1, False)
            w = {"add": max(w1, w2) + 1, "sub": max(w1, w2) + 1, "mul": w1 + w2,
                 "div": w1 + (1 if sg else 0), "rem": min(w1, w2)}[op]
            return f"{op}({a}, {b})", Sig("", w, sg)
        if kind < 0.5:
            op = rng.choice(UNARY)
            a, sa = self.operand(None, depth)
            if op == "not":
                return f"not({a})", Sig("", sa.width, False)
            if op in ("andr", "orr", "xorr"):
                return f"{op}({a})", Sig("", 1, False)
            if op == "asUInt":
                return f"asUInt({a})", Sig("", sa.width, False)
            if op == "asSInt":
                return f"asSInt({a})", Sig("", sa.width, True)
            if op == "cvt":
                return f"cvt({a})", Sig("", sa.width + (0 if sa.signed else 1), True)
            return f"neg({a})", Sig("", sa.width + 1, True)
        if kind < 0.65:
            a, sa = self.operand(None, depth)
            op = rng.choice(["pad", "shl", "shr", "dshl", "dshr", "head", "tail"])
            w = sa.width
            if op == "pad":
                n = rng.randint(1, self.p.max_width)
                return f"pad({a}, {n})", Sig("", max(w, n), sa.signed)
            if op == "shl":
                n = rng.randint(0, 8)
                return f"shl({a}, {n})", Sig("", w + n, sa.signed)
            if op == "shr":
                n = rng.randint(0, w + 1)
                return f"shr({a}, {n})", Sig("", max(w - n, 1), sa.signed)
            if op in ("dshl", "dshr"):
                b, sb = self.pick(False)
                k = rng.randint(1, 3)
                if sb.width > k:
                    b = f"bits({b}, {k - 1}, 0)"
                else:
                    k = sb.width
                if op == "dshl":
                    return f"dshl({a}, {b})", Sig("", w + (1 << k) - 1, sa.signed)
                return f"dshr({a}, {b})", Sig("", w, sa.signed)
            if w == 1:
                return f"asUInt({a})", Sig("", 1, False)
            n = rng.randint(1, w - 1)
            if op == "head":
                return f"head({a}, {n})", Sig("", n, False)
            return f"tail({a}, {n})", Sig("", w - n, False)
        if kind < 0.85:
            # cat/bits structures
            if rng.random() < 0.5:
                a, sa = self.operand(None, depth)
                b, sb = self.operand(None, depth)
                return f"cat({a}, {b})", Sig("", sa.width + sb.width, False)
            a, sa = self.operand(None, depth)
            hi = rng.randint(0, sa.width - 1)
            lo = rng.randint(0, hi)
            return f"bits({a}, {hi}, {lo})", Sig("", hi - lo + 1, False)
        c, _ = self.pick(width1=True) if rng.random() < 0.7 else self.expr_cond(depth)
        a, sa = self.operand(None, depth)
        b, sb = self.operand(sa.signed, depth)
        return f"mux({c}, {a}, {b})", Sig("", max(sa.width, sb.width), sa.signed)

    def expr_cond(self, depth: int) -> tuple[str, Sig]:
        a, sa = self.pick()
        b, _ = self.pick(sa.signed)
        return f"{self.rng.choice(['lt', 'eq', 'neq', 'geq'])}({a}, {b})", Sig("", 1, False)

    def fit(self, text: str, src: Sig, dst: Sig) -> str:
        """Make ``text`` connectable to ``dst`` (same sign, not wider)."""
        if src.signed != dst.signed:
            text = f"asSInt({text})" if dst.signed else f"asUInt({text})"
        if src.width > dst.width:
            text = f"bits({text}, {dst.width - 1}, 0)"
            if dst.signed:
                text = f"asSInt({text})"
        return text


def random_circuit(seed: int, params: GenParams | None = None, **kw) -> str:
    """FIRRTL text for a random circuit; the same seed gives the same text."""
    p = params or GenParams(**kw)
    b = _Builder(seed, p)
    rng = b.rng
    ports = ["    input clock : Clock", "    input reset : UInt<1>"]
    resets = ["reset"]
    if p.second_reset and rng.random() < 0.3:
        ports.append("    input rst2 : UInt<1>")
        resets.append("rst2")
    for i in range(p.inputs):
        s = Sig(f"in{i}", _width(rng, p.max_width) if i else 1, rng.random() < 0.25)
        ports.append(f"    input {s.name} : {s.type}")
        b.pool.append(s)

    regs = []
    decls = []
    for i in range(p.registers):
        s = Sig(f"r{i}", _width(rng, p.max_width), rng.random() < 0.25)
        mode = rng.random()
        if mode < 0.6:
            rst = rng.choice(resets)
            decls.append(f"    reg {s.name} : {s.type}, clock with :")
            decls.append(f"      reset => ({rst}, {b.lit(s.width, s.signed)})")
        else:
            decls.append(f"    reg {s.name} : {s.type}, clock")
        regs.append(s)
        b.pool.append(s)

    wires = [Sig(f"w{i}", _width(rng, p.max_width), rng.random() < 0.25) for i in range(p.wires)]
    decls += [f"    wire {w.name} : {w.type}" for w in wires]

    mem_lines: list[str] = []
    mem_sig = None
    if p.memory and rng.random() < 0.5:
        depth = rng.choice([4, 10, 16])
        mem_sig = Sig("m", rng.randint(1, p.max_width), False)
        decls += ["    mem m :", f"      data-type => {mem_sig.type}", f"      depth => {depth}",
                  "      read-latency => 0", "      write-latency => 1", "      reader => rd",
                  "      writer => wr", "      read-under-write => undefined"]

    body = b.body
    n_wires_placed = 0
    mem_placed = False
    for j in range(p.nodes):
        if n_wires_placed < len(wires) and rng.random() < 0.08:
            w = wires[n_wires_placed]
            n_wires_placed += 1
            a, sa = b.operand(w.signed)
            body.append(f"    {w.name} <= {b.fit(a, sa, w)}")
            c, _ = b.pick(width1=True)
            x, sx = b.operand(w.signed)
            body.append(f"    when {c} :")
            body.append(f"      {w.name} <= {b.fit(x, sx, w)}")
            if rng.random() < 0.5:
                y, sy = b.operand(w.signed)
                body.append("    else :")
                body.append(f"      {w.name} <= {b.fit(y, sy, w)}")
            b.pool.append(w)
            continue
        if mem_sig is not None and not mem_placed and j > p.nodes // 3:
            mem_placed = True
            addr, _ = b.pick(False)
            body += [f"    m.rd.addr <= {addr}", "    m.rd.en <= UInt<1>(1)",
                     "    m.rd.clk <= clock"]
            b.pool.append(Sig("m.rd.data", mem_sig.width, False))
            continue
        text, s = b.expr()
        name = b.fresh("n")
        body.append(f"    node {name} = {text}")
        b.pool.append(Sig(name, s.width, s.signed))
    for w in wires[n_wires_placed:]:
        a, sa = b.operand(w.signed)
        body.append(f"    {w.name} <= {b.fit(a, sa, w)}")
        b.pool.append(w)
    if mem_sig is not None:
        if not mem_placed:
            addr, _ = b.pick(False)
            body += [f"    m.rd.addr <= {addr}", "    m.rd.en <= UInt<1>(1)",
                     "    m.rd.clk <= clock"]
            b.pool.append(Sig("m.rd.data", mem_sig.width, False))
        addr, _ = b.pick(False)
        en, _ = b.pick(width1=True)
        d, sd = b.pick()
        mem_lines += [f"    m.wr.addr <= {addr}", f"    m.wr.en <= {en}",
                      "    m.wr.mask <= UInt<1>(1)", "    m.wr.clk <= clock",
                      f"    m.wr.data <= {b.fit(d, sd, mem_sig)}"]

    # register next-state, sometimes under a when so the register holds
    for r in regs:
        x, sx = b.pick()
        nxt = b.fit(x, sx, r)
        if rng.random() < 0.3:
            c, _ = b.pick(width1=True)
            body.append(f"    when {c} :")
            body.append(f"      {r.name} <= {nxt}")
        else:
            body.append(f"    {r.name} <= {nxt}")

    outs = []
    for i in range(p.outputs):
        _, s = b.pick()
        o = Sig(f"out{i}", s.width, s.signed)
        ports.append(f"    output {o.name} : {o.type}")
        outs.append(f"    {o.name} <= {s.name}")
    # every register is observable through an output so none is dead
    for r in regs:
        if rng.random() < 0.5:
            ports.append(f"    output o_{r.name} : {r.type}")
            outs.append(f"    o_{r.name} <= {r.name}")

    lines = [f"circuit Rand{seed} :", f"  module Rand{seed} :", *ports, "", *decls, *body,
             *mem_lines, *outs]
    return "\n".join(lines) + "\n"


def random_stimulus(seed: int, inputs: dict[str, int], cycles: int,
                    reset_names: list[str] = ()) -> list[dict[str, int]]:
    """Per-cycle input assignments; resets pulse rarely, data inputs often hold."""
    rng = random.Random(seed)
    out = []
    for c in range(cycles):
        pokes = {}
        for name, w in inputs.items():
            if name in reset_names:
                pokes[name] = 1 if c < 2 or rng.random() < 0.02 else 0
            elif rng.random() < 0.3:
                pokes[name] = rng.getrandbits(w)
        out.append(pokes)
    return out
