"""Line-oriented testbench scripts: poke, step, expect, reset."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..oracle import SimError


class ScriptError(ValueError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


@dataclass
class Command:
    op: str
    args: tuple
    line: int


@dataclass
class ExpectFailure:
    cycle: int
    signal: str
    expected: int
    actual: int
    line: int

    def __str__(self) -> str:
        return (f"expect failed at cycle {self.cycle} (line {self.line}): {self.signal} "
                f"expected={self.expected} actual={self.actual}")


@dataclass
class RunResult:
    passed: bool
    cycles: int
    failure: ExpectFailure | None = None
    expects: int = 0
    trace: list = field(default_factory=list)


_ARITY = {"poke": 2, "expect": 2, "step": 1, "reset": 1}


def _int(tok: str, line: int) -> int:
    try:
        v = int(tok, 0)
    except ValueError:
        raise ScriptError(line, f"expected an unsigned integer, got {tok!r}") from None
    if v < 0:
        raise ScriptError(line, f"expected an unsigned integer, got {tok!r}")
    return v


def parse_script(text: str) -> list[Command]:
    cmds = []
    for i, raw in enumerate(text.splitlines(), 1):
        s = raw.split("#", 1)[0].strip()
        if not s:
            continue
        toks = s.split()
        op = toks[0]
        if op not in _ARITY:
            raise ScriptError(i, f"unknown command {op!r}")
        if len(toks) - 1 != _ARITY[op]:
            raise ScriptError(i, f"{op} takes {_ARITY[op]} argument(s)")
        if op in ("poke", "expect"):
            cmds.append(Command(op, (toks[1], _int(toks[2], i)), i))
        else:
            cmds.append(Command(op, (_int(toks[1], i),), i))
    return cmds


def run_script(sim, script: str | list[Command], recorder=None,
               trace_signals: list[str] | None = None) -> RunResult:
    """Execute ``script`` against ``sim`` (engine or oracle).

    ``recorder`` (if given) is sampled at cycle 0 and after every cycle;
    ``trace_signals`` are peeked after every cycle into ``RunResult.trace``.
    Unknown signals raise :class:`SimError`.
    """
    cmds = parse_script(script) if isinstance(script, str) else script
    result = RunResult(True, 0)
    per_cycle = recorder is not None or trace_signals

    def tick(n: int) -> None:
        if not per_cycle:
            sim.step(n)
            return
        for _ in range(n):
            sim.step(1)
            if recorder is not None:
                recorder.sample()
            if trace_signals:
                result.trace.append(tuple(sim.peek(s) for s in trace_signals))

    if recorder is not None:
        recorder.sample()
    for c in cmds:
        if c.op == "poke":
            sim.poke(*c.args)
        elif c.op == "step":
            tick(c.args[0])
        elif c.op == "reset":
            names = sim.reset_inputs
            if not names:
                raise SimError(f"line {c.line}: design has no reset input")
            for r in names:
                sim.poke(r, 1)
            tick(c.args[0])
            for r in names:
                sim.poke(r, 0)
        else:
            name, want = c.args
            got = sim.peek(name)
            result.expects += 1
            if got != want:
                result.passed = False
                result.failure = ExpectFailure(sim.cycle, name, want, got, c.line)
                break
    result.cycles = sim.cycle
    return result
