"""FIRRTL abstract syntax tree for the supported scalar subset."""

from __future__ import annotations

from dataclasses import dataclass, field


class FirrtlError(Exception):
    """A diagnostic with a source position, formatted ``file:line:col: error: msg``."""

    def __init__(self, message: str, line: int = 0, col: int = 0, file: str = "<input>"):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col
        self.file = file

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}: error: {self.message}"


@dataclass
class Diagnostic:
    severity: str
    message: str
    line: int = 0
    col: int = 0
    file: str = "<input>"

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}: {self.severity}: {self.message}"


@dataclass(frozen=True)
class Type:
    kind: str                 # UInt, SInt, Clock, Reset, AsyncReset
    width: int | None = None

    @property
    def signed(self) -> bool:
        return self.kind == "SInt"

    @property
    def bit_width(self) -> int:
        if self.kind in ("Clock", "Reset", "AsyncReset"):
            return 1
        assert self.width is not None
        return self.width


# expressions ---------------------------------------------------------------

@dataclass(frozen=True)
class Ref:
    name: str


@dataclass(frozen=True)
class Lit:
    type: Type
    value: int


@dataclass(frozen=True)
class Prim:
    op: str
    args: tuple = ()
    consts: tuple[int, ...] = ()


# statements ----------------------------------------------------------------

@dataclass
class Port:
    name: str
    direction: str            # "input" | "output"
    type: Type
    line: int = 0


@dataclass
class Wire:
    name: str
    type: Type
    line: int = 0


@dataclass
class Reg:
    name: str
    type: Type
    clock: object
    reset: object | None = None
    init: object | None = None
    line: int = 0


@dataclass
class Node:
    name: str
    expr: object
    line: int = 0


@dataclass
class Connect:
    loc: str
    expr: object
    line: int = 0


@dataclass
class Invalidate:
    loc: str
    line: int = 0


@dataclass
class When:
    cond: object
    then: list
    otherwise: list = field(default_factory=list)
    line: int = 0


@dataclass
class Inst:
    name: str
    module: str
    line: int = 0


@dataclass
class Mem:
    name: str
    type: Type
    depth: int
    readers: list[str] = field(default_factory=list)
    writers: list[str] = field(default_factory=list)
    read_latency: int = 0
    write_latency: int = 1
    line: int = 0


@dataclass
class Module:
    name: str
    ports: list[Port]
    body: list
    line: int = 0


@dataclass
class Circuit:
    name: str
    modules: list[Module]
    diagnostics: list[Diagnostic] = field(default_factory=list)

    def module(self, name: str) -> Module:
        for m in self.modules:
            if m.name == name:
                return m
        raise KeyError(name)

    @property
    def main(self) -> Module:
        return self.module(self.name)
