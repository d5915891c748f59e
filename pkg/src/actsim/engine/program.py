"""Compile an optimized graph and a supernode plan into a runnable program.

The program is Python source generated once per design.  Its ``run`` function
executes whole cycles with the active words held in locals, checking each
word, then each byte of a non-zero word, then each bit of a non-zero byte
before evaluating the supernode behind that bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..ir.codegen import RUNTIME, Hoister, Namer, to_python
from ..ir.graph import NodeKind, RtlGraph
from ..opt.activation import Strategy
from ..opt.reset import ResetGroup
from ..partition import SOURCE_KINDS, SupernodePlan

BYTE = 8


class PlanError(ValueError):
    """The supernode plan does not match the graph."""


@dataclass
class Block:
    index: int
    word: int
    bit: int
    members: list[int]
    # producer -> (strategy, target supernodes)
    activations: dict[int, tuple[Strategy, list[int]]] = field(default_factory=dict)


@dataclass
class SimProgram:
    graph: RtlGraph
    blocks: list[Block]
    n_words: int
    word_bits: int
    # register write id -> (read id, [(word, mask)], target count)
    reg_table: dict[int, tuple[int, list[tuple[int, int]], int]]
    # (write id, mem id, valid shift, addr mask, data width, depth, [(word, mask)], count)
    mem_table: list[tuple]
    # source id -> ([(word, mask)], target count), for pokes
    source_table: dict[int, tuple[list[tuple[int, int]], int]]
    reset_groups: list[ResetGroup]
    full_eval: bool
    eval_count: int
    source: str
    run: object = field(repr=False, default=None)
    # member count of the blocks set in both of two word lists
    overlap: object = field(repr=False, default=None)

    @property
    def n_supernodes(self) -> int:
        return len(self.blocks)

    def activation_targets(self, nid: int) -> list[int]:
        for b in self.blocks:
            if nid in b.activations:
                return b.activations[nid][1]
        return []


def _masks(targets, word_bits: int) -> list[tuple[int, int]]:
    words: dict[int, int] = {}
    for t in targets:
        words[t // word_bits] = words.get(t // word_bits, 0) | (1 << (t % word_bits))
    return sorted(words.items())


def _check_plan(g: RtlGraph, plan: SupernodePlan) -> None:
    evaluated = {k for k, n in g.nodes.items() if n.kind not in SOURCE_KINDS}
    seen: set[int] = set()
    for j, ms in enumerate(plan.members):
        for m in ms:
            if m in seen:
                raise PlanError(f"node {m} appears in more than one supernode")
            if m not in evaluated:
                raise PlanError(f"node {m} is not an evaluated node of the graph")
            if plan.node_to_sn.get(m) != j:
                raise PlanError(f"node {m} is listed under supernode {j} inconsistently")
            seen.add(m)
    missing = evaluated - seen
    if missing:
        raise PlanError(f"nodes missing from the plan: {sorted(missing)[:10]}")


class _Gen:
    def __init__(self, g: RtlGraph, prog_blocks: list[Block], plan: SupernodePlan | None,
                 groups: list[ResetGroup], strategies: dict, word_bits: int):
        self.g = g
        self.blocks = prog_blocks
        self.plan = plan
        self.groups = groups
        self.strategies = strategies
        self.wb = word_bits
        self.lines: list[str] = []
        self.slow_regs = {g[r].partner for grp in groups for r in grp.registers}

    def emit(self, depth: int, text: str) -> None:
        self.lines.append("    " * depth + text)

    def node_code(self, nid: int, depth: int, local: set[int], activate) -> None:
        n = self.g[nid]
        names = Namer(lambda k: f"x{k}" if k in local else f"v[{k}]", lambda m: f"MEM[{m}]")
        h = Hoister(prefix=f"_t{nid}_", indent="    " * depth)
        src = to_python(n.expr, names, h)
        self.lines += h.take()
        x = f"x{nid}"
        self.emit(depth, f"{x} = {src}")
        local.add(nid)
        if n.kind is NodeKind.REG_WRITE:
            self.emit(depth, f"v[{nid}] = {x}")
            self.emit(depth, f"if {x} != v[{n.partner}]: P.append({nid})")
            if n.reset is not None and nid not in self.slow_regs:
                self.emit(depth, "rc += 1")
            return
        if activate is None:
            self.emit(depth, f"v[{nid}] = {x}")
            return
        strategy, masks, count = activate
        if strategy is Strategy.BRANCHLESS:
            self.emit(depth, f"c = {x} != v[{nid}]")
            self.emit(depth, f"v[{nid}] = {x}")
            for w, m in masks:
                self.emit(depth, f"a{w} |= c * {m}")
            self.emit(depth, f"na += {count}")
        else:
            self.emit(depth, f"if {x} != v[{nid}]:")
            self.emit(depth + 1, f"v[{nid}] = {x}")
            for w, m in masks:
                self.emit(depth + 1, f"a{w} |= {m}")
            self.emit(depth + 1, f"na += {count}")

    def reset_capture(self, depth: int) -> None:
        if not self.groups:
            return
        self.emit(depth, f"rc += {len(self.groups)}")
        names = Namer(lambda k: f"v[{k}]", lambda m: f"MEM[{m}]")
        for i, grp in enumerate(self.groups):
            inits = ", ".join(to_python(e, names) for _, e in grp.members)
            self.emit(depth, f"c{i} = ({inits},) if v[{grp.signal}] else None")

    def reset_apply(self, depth: int, succs: dict) -> None:
        for i, grp in enumerate(self.groups):
            regs = grp.registers
            targets = set()
            for r in regs:
                targets |= {self.plan.node_to_sn[s] for s in succs[r]} if self.plan else set()
            self.emit(depth, f"if c{i} is not None:")
            lhs = ", ".join(f"v[{r}]" for r in regs)
            self.emit(depth + 1, f"{lhs}, = c{i}")
            for w, m in _masks(targets, self.wb):
                self.emit(depth + 1, f"A[{w}] |= {m}")
            if targets:
                self.emit(depth + 1, f"na += {len(targets)}")
            writes = ", ".join(str(self.g[r].partner) for r in regs)
            self.emit(depth + 1, f"P.extend(({writes},))")

    def commits(self, depth: int) -> None:
        e = self.emit
        e(depth, "if P:")
        e(depth + 1, "for w in P:")
        e(depth + 2, "r, tab, k = RT[w]")
        e(depth + 2, "x = v[w]")
        e(depth + 2, "if v[r] != x:")
        e(depth + 3, "v[r] = x")
        e(depth + 3, "for i, m in tab: A[i] |= m")
        e(depth + 3, "na += k")
        e(depth + 1, "P.clear()")
        e(depth, "for w, mid, sh, am, dw, dm, depth, tab, k in MW:")
        e(depth + 1, "x = v[w]")
        e(depth + 1, "if x >> sh:")
        e(depth + 2, "addr = (x >> dw) & am")
        e(depth + 2, "st = MEM[mid]")
        e(depth + 2, "if addr < depth and st[addr] != x & dm:")
        e(depth + 3, "st[addr] = x & dm")
        e(depth + 3, "for i, m in tab: A[i] |= m")
        e(depth + 3, "na += k")


def _header(gen: _Gen) -> None:
    gen.emit(0, "def run(ncyc, settle, fresh, ev0, v, MEM, A, P, sc, hist, RT, MW, Z, S):")
    gen.emit(1, "ev_t = ex = na = rc = 0")


def _footer(gen: _Gen) -> None:
    gen.emit(1, "return ev_t, ex, na, rc")


def compile_program(g: RtlGraph, plan: SupernodePlan, groups: list[ResetGroup] | None = None,
                    strategies: dict | None = None, full_eval: bool = False) -> SimProgram:
    """Generate the cycle function for ``g`` partitioned by ``plan``.

    ``full_eval`` produces the baseline program: every node every cycle in
    topological order with no activity checks.  The plan still has to cover
    the graph so both programs share the register and memory tables.
    """
    groups = list(groups or [])
    strategies = strategies or {}
    _check_plan(g, plan)
    wb = plan.word_bits
    succs = g.succs()
    sn = plan.node_to_sn

    blocks = []
    for j, ms in enumerate(plan.members):
        b = Block(j, j // wb, j % wb, list(ms))
        for m in ms:
            targets = sorted({sn[s] for s in succs[m] if s in sn and sn[s] != j})
            if targets:
                b.activations[m] = (strategies.get(m, Strategy.BRANCHING), targets)
        blocks.append(b)
    n_words = -(-len(blocks) // wb)

    def table(nid: int) -> tuple[list[tuple[int, int]], int]:
        targets = {sn[s] for s in succs[nid] if s in sn}
        return _masks(targets, wb), len(targets)

    reg_table = {}
    for n in g.of_kind(NodeKind.REG_WRITE):
        tab, k = table(n.partner)
        reg_table[n.id] = (n.partner, tab, k)
    mem_table = []
    for m in g.mems.values():
        readers = {sn[r] for r in m.readers if r in sn}
        tab, k = _masks(readers, wb), len(readers)
        for w in m.writers:
            e = g[w].expr
            _, addr, data = e.args
            aw, dw = addr.width, data.width
            mem_table.append((w, m.id, aw + dw, (1 << aw) - 1, dw, (1 << dw) - 1, m.depth, tab, k))
    source_table = {n.id: table(n.id) for n in g.of_kind(*SOURCE_KINDS)}

    gen = _Gen(g, blocks, plan, groups, strategies, wb)
    _header(gen)
    if full_eval:
        _full_body(gen, g, plan)
    else:
        _activity_body(gen, blocks, n_words, succs)
    _footer(gen)
    source = "\n".join(gen.lines) + "\n"
    ns = dict(RUNTIME)
    ns["OVERLAP"] = _overlap_fn(blocks, n_words)
    exec(compile(source, f"<actsim:{g.name}>", "exec"), ns)
    return SimProgram(g, blocks, n_words, wb, reg_table, mem_table, source_table, groups,
                      full_eval, sum(len(b.members) for b in blocks), source, ns["run"],
                      ns["OVERLAP"])


def _overlap_fn(blocks: list[Block], n_words: int):
    sizes = [dict() for _ in range(n_words)]
    for b in blocks:
        sizes[b.word][b.bit] = len(b.members)

    def overlap(x, y) -> int:
        total = 0
        for w in range(n_words):
            both = x[w] & y[w]
            while both:
                low = both & -both
                total += sizes[w][low.bit_length() - 1]
                both ^= low
        return total
    return overlap


def _activity_body(gen: _Gen, blocks: list[Block], n_words: int, succs) -> None:
    e = gen.emit
    wb = gen.wb
    e(1, "for _ in range(ncyc):")
    if n_words:
        e(2, ", ".join(f"a{w}" for w in range(n_words)) + ", = A")
    e(2, "ev = 0")
    for w in range(n_words):
        in_word = [b for b in blocks if b.word == w]
        e(2, f"if a{w}:")
        n_bytes = -(-len(in_word) // BYTE)
        e(3, f"ex += {n_bytes}")
        for byte in range(n_bytes):
            chunk = in_word[byte * BYTE:(byte + 1) * BYTE]
            bmask = sum(1 << b.bit for b in chunk)
            e(3, f"if a{w} & {bmask}:")
            e(4, f"ex += {len(chunk)}")
            for b in chunk:
                e(4, f"if a{w} & {1 << b.bit}:")
                e(5, f"sc[{b.index}] += 1")
                e(5, f"ev += {len(b.members)}")
                local: set[int] = set()
                for m in b.members:
                    act = None
                    if m in b.activations:
                        strategy, targets = b.activations[m]
                        act = (strategy, _masks(targets, wb), len(targets))
                    gen.node_code(m, 5, local, act)
    e(2, "ev_t += ev")
    if n_words:
        e(2, "A[:] = Z")
    # the final active words are exactly the blocks evaluated this pass
    words = "(" + "".join(f"a{w}, " for w in range(n_words)) + ")"
    e(2, "if settle:")
    for w in range(n_words):
        e(3, f"S[{w}] |= a{w}")
    e(3, "break")
    # blocks a settle already evaluated belong to this cycle, counted once
    e(2, "if ev0:")
    e(3, f"ev += ev0 - OVERLAP(S, {words})" if n_words else "ev += ev0")
    e(3, "ev0 = 0")
    if n_words:
        e(3, "S[:] = Z")
    e(2, "hist[ev] = hist.get(ev, 0) + 1")
    gen.reset_capture(2)
    gen.commits(2)
    gen.reset_apply(2, succs)


def _full_body(gen: _Gen, g: RtlGraph, plan: SupernodePlan) -> None:
    e = gen.emit
    order = [m for ms in plan.members for m in ms]
    total = len(order)
    inline_resets = sum(1 for n in g.of_kind(NodeKind.REG_WRITE)
                        if n.reset is not None and n.id not in gen.slow_regs)
    e(1, "for _ in range(ncyc):")
    # a settle right before the step already computed this cycle's values
    e(2, "if fresh:")
    e(3, "fresh = ev = 0")
    e(2, "else:")
    local: set[int] = set()
    for m in order:
        n = g[m]
        names = Namer(lambda k: f"x{k}" if k in local else f"v[{k}]", lambda i: f"MEM[{i}]")
        h = Hoister(prefix=f"_t{m}_", indent="            ")
        src = to_python(n.expr, names, h)
        gen.lines += h.take()
        e(3, f"x{m} = {src}")
        e(3, f"v[{m}] = x{m}")
        local.add(m)
    e(3, f"ev = {total}")
    e(3, f"ev_t += {total}")
    e(2, "if settle: break")
    e(2, f"hist[{total}] = hist.get({total}, 0) + 1")
    if inline_resets:
        e(2, f"rc += {inline_resets}")
    gen.reset_capture(2)
    for n in g.of_kind(NodeKind.REG_WRITE):
        e(2, f"v[{n.partner}] = v[{n.id}]")
    gen.commits(2)
    gen.reset_apply(2, g.succs())
