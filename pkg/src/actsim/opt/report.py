from __future__ import annotations

from dataclasses import asdict, dataclass, field


@dataclass
class PassReport:
    """What one pass did; serialized into the ``--report`` JSON."""

    name: str
    nodes_before: int = 0
    nodes_after: int = 0
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)
