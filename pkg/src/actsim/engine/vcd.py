"""Value change dump of the named signals, one timestep per cycle."""

from __future__ import annotations

from typing import IO

from vcd import VCDWriter


class VcdRecorder:
    """Samples every probe of ``sim`` after each cycle and writes changes."""

    def __init__(self, sim, stream: IO[str], scope: str = "top"):
        self.sim = sim
        self.writer = VCDWriter(stream, timescale="1 ns", scope_sep="/")
        probes = sim.probes()
        # probes are kept in node-id order, so identifiers follow it
        self.vars = [(name, self.writer.register_var(scope, name, "wire", size=e.width))
                     for name, e in probes.items()]

    def sample(self) -> None:
        t = self.sim.cycle
        for name, var in self.vars:
            self.writer.change(var, t, self.sim.peek(name))

    def close(self) -> None:
        self.writer.close(self.sim.cycle)
