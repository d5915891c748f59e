"""Analytical per-cycle overhead model and its calibration from counters.

A cycle costs ``((E + A_succ * s) * af + A_exam * x) * N`` where ``af`` is
the activity factor, ``N`` the node count, ``s`` the measured activations
per evaluated node and ``x`` the measured active-bit examinations per node.
With ``s = x = 1`` this is the textbook form in which every evaluated node
activates one successor and every node has its own active bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls


class UncalibratedError(RuntimeError):
    pass


@dataclass
class RunSample:
    """Counters and wall time of one measured run."""

    cycles: int
    evaluated_nodes: int
    activations: int
    examinations: int
    node_count: int
    seconds: float

    @classmethod
    def from_metrics(cls, metrics: dict, seconds: float) -> "RunSample":
        return cls(metrics["cycles"], metrics["evaluated_nodes"], metrics["activations"],
                   metrics["examinations"], metrics["node_count"], seconds)

    @property
    def af(self) -> float:
        return self.evaluated_nodes / (self.cycles * self.node_count) if self.node_count else 0.0

    def per_cycle(self) -> np.ndarray:
        c = self.cycles
        return np.array([self.evaluated_nodes / c, self.activations / c, self.examinations / c])


@dataclass
class OverheadModel:
    E: float | None = None
    A_succ: float | None = None
    A_exam: float | None = None
    af: float = 0.0
    N: int = 0
    succ_per_active: float = 1.0
    exam_per_node: float = 1.0

    @property
    def calibrated(self) -> bool:
        return None not in (self.E, self.A_succ, self.A_exam)

    def with_run(self, sample: RunSample) -> "OverheadModel":
        """Same weights, activity and structure taken from ``sample``."""
        evals = sample.evaluated_nodes
        return OverheadModel(self.E, self.A_succ, self.A_exam, sample.af, sample.node_count,
                             sample.activations / evals if evals else 0.0,
                             sample.examinations / (sample.cycles * sample.node_count)
                             if sample.node_count else 0.0)

    def to_dict(self) -> dict:
        return {"E": self.E, "A_succ": self.A_succ, "A_exam": self.A_exam,
                "predicted_T": predict_cycle_cost(self) if self.calibrated else None}


def predict_cycle_cost(m: OverheadModel) -> float:
    if not m.calibrated:
        raise UncalibratedError("overhead model weights are not calibrated")
    return ((m.E + m.A_succ * m.succ_per_active) * m.af + m.A_exam * m.exam_per_node) * m.N


def calibrate(samples: list[RunSample]) -> OverheadModel:
    """Non-negative least-squares fit of the three weights to seconds per cycle."""
    if len(samples) < 2:
        raise UncalibratedError("calibration needs at least two measured runs")
    X = np.array([s.per_cycle() for s in samples])
    y = np.array([s.seconds / s.cycles for s in samples])
    # scale columns so the fit is not dominated by the largest counter
    scale = X.max(axis=0)
    scale[scale == 0] = 1.0
    w, _ = nnls(X / scale, y)
    w = w / scale
    return OverheadModel(float(w[0]), float(w[1]), float(w[2]))


def rank_agreement(samples: list[RunSample], model: OverheadModel) -> bool:
    """Whether the model's cheapest run is also the fastest measured one."""
    predicted = [predict_cycle_cost(model.with_run(s)) for s in samples]
    measured = [s.seconds / s.cycles for s in samples]
    return int(np.argmin(predicted)) == int(np.argmin(measured))
