import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from actsim.cli import bench_sweep
from actsim.corpus import cases
from actsim.metrics import (OverheadModel, RunSample, UncalibratedError, calibrate,
                            predict_cycle_cost, rank_agreement)
from actsim.pipeline import PipelineConfig

weights = st.floats(0, 100, allow_nan=False)


def model(E, As, Ax, af, N):
    return OverheadModel(E, As, Ax, af, N)


@given(weights, weights, weights, st.integers(0, 10 ** 6))
def test_zero_activity(E, As, Ax, N):
    assert predict_cycle_cost(model(E, As, Ax, 0.0, N)) == pytest.approx(Ax * N)


@given(weights, weights, weights, st.integers(0, 10 ** 6))
def test_full_activity(E, As, Ax, N):
    assert predict_cycle_cost(model(E, As, Ax, 1.0, N)) == pytest.approx((E + As + Ax) * N)


@given(st.floats(0.01, 100), weights, weights, st.integers(1, 10 ** 6),
       st.floats(0.01, 1.0))
def test_halving_activity_lowers_cost(E, As, Ax, N, af):
    full = predict_cycle_cost(model(E, As, Ax, af, N))
    half = predict_cycle_cost(model(E, As, Ax, af / 2, N))
    assert half < full


@given(weights, weights, weights, st.floats(0, 4), st.integers(0, 10 ** 6))
def test_cost_non_negative(E, As, Ax, af, N):
    assert predict_cycle_cost(model(E, As, Ax, af, N)) >= 0


def test_uncalibrated_model_refuses():
    with pytest.raises(UncalibratedError):
        predict_cycle_cost(OverheadModel(af=0.5, N=10))
    assert OverheadModel().to_dict()["predicted_T"] is None


def _synthetic(w, rows):
    out = []
    for cycles, ev, act, ex, n in rows:
        secs = cycles * float(np.dot(w, [ev / cycles, act / cycles, ex / cycles]))
        out.append(RunSample(cycles, ev, act, ex, n, secs))
    return out


ROWS = [(100, 5000, 2000, 300, 60), (100, 1000, 900, 1200, 60),
        (200, 400, 100, 2000, 60), (50, 3000, 50, 50, 60)]


def test_calibration_needs_two_runs():
    with pytest.raises(UncalibratedError):
        calibrate(_synthetic([1, 1, 1], ROWS[:1]))
    assert calibrate(_synthetic([1, 1, 1], ROWS[:2])).calibrated


def test_calibration_recovers_weights():
    w = np.array([3e-7, 1e-7, 5e-8])
    m = calibrate(_synthetic(w, ROWS))
    ref, *_ = np.linalg.lstsq(np.array([[ev / c, a / c, x / c] for c, ev, a, x, _ in ROWS]),
                              np.array([s.seconds / s.cycles for s in _synthetic(w, ROWS)]),
                              rcond=None)
    assert [m.E, m.A_succ, m.A_exam] == pytest.approx(list(ref), rel=1e-6)
    assert [m.E, m.A_succ, m.A_exam] == pytest.approx(list(w), rel=1e-6)


def test_calibrated_model_reproduces_measured_cost():
    w = [3e-7, 1e-7, 5e-8]
    samples = _synthetic(w, ROWS)
    m = calibrate(samples)
    for s in samples:
        assert predict_cycle_cost(m.with_run(s)) == pytest.approx(s.seconds / s.cycles)
    assert rank_agreement(samples, m)


def test_with_run_measures_structure():
    s = RunSample(10, 200, 100, 50, 40, 1.0)
    m = OverheadModel(1.0, 1.0, 1.0).with_run(s)
    assert m.af == pytest.approx(0.5)
    assert m.succ_per_active == pytest.approx(0.5)
    assert m.exam_per_node == pytest.approx(50 / 400)


@pytest.mark.slow
def test_ranking_fidelity_on_corpus():
    """Model and measurement pick the same best size on most designs."""
    sizes = [2, 5, 10, 20, 35, 50, 200]
    agree = 0
    for c in cases():
        sweep = bench_sweep(c.load(), PipelineConfig(), c.script(), sizes, 5000, 3)
        agree += sweep["model"]["best_agrees"]
    print(f"ranking agreement on {agree} of {len(cases())} designs")
    assert agree > len(cases()) / 2
