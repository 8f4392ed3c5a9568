import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from levywind.levy import (
    ExpJumps, LevySpec, PathRecord, c_function, drift_coefficient, grid_steps, is_subordinator,
    levy_exponent, sample_path,
)

EXP11 = ExpJumps(1.0, 1.0)
# independent oracle: 1 - int_0^inf y e^{-y} / (1 + y^2) dy, frozen from scipy.quad / mpmath
DRIFT_A1_P1_Q1 = 0.6566220384435942


def test_exponent_pure_brownian():
    assert levy_exponent(LevySpec(a=0.0, sigma2=1.0), 1.0) == pytest.approx(-0.5)


@pytest.mark.parametrize("theta", [0.3, 1.0, -2.5])
def test_exponent_pure_drift(theta):
    assert levy_exponent(LevySpec(a=2.0), theta) == pytest.approx(2j * theta)


def test_exponent_compound_poisson_zero_drift():
    spec = LevySpec.from_drift(0.0, jumps=EXP11)
    assert levy_exponent(spec, 1.0) == pytest.approx((-1 + 1j) / 2, abs=1e-12)


def test_exponent_matches_direct_quadrature():
    spec = LevySpec(a=0.4, sigma2=0.3, jumps=ExpJumps(2.0, 1.5))
    th = 0.7
    p, q = 2.0, 1.5
    re = integrate.quad(lambda y: (math.cos(th * y) - 1) * p * q * math.exp(-q * y), 0, np.inf)[0]
    im = integrate.quad(lambda y: (math.sin(th * y) - th * y / (1 + y * y)) * p * q * math.exp(-q * y), 0, np.inf)[0]
    ref = 1j * 0.4 * th - 0.5 * 0.3 * th**2 + re + 1j * im
    assert levy_exponent(spec, th) == pytest.approx(ref, abs=1e-10)


def test_drift_examples():
    assert drift_coefficient(LevySpec(a=3.0)) == 3.0
    spec = LevySpec(a=1.0, jumps=EXP11)
    assert drift_coefficient(spec) == pytest.approx(DRIFT_A1_P1_Q1, abs=1e-10)
    assert drift_coefficient(LevySpec(a=spec.compensator, jumps=EXP11)) == pytest.approx(0.0, abs=1e-15)


def test_c_function_examples():
    assert c_function(LevySpec(a=1.0, sigma2=1.0), 1.0) == pytest.approx(0.5)
    assert c_function(LevySpec.from_drift(0.0, jumps=EXP11), 1.0) == pytest.approx(0.5)
    for s in (0.0, 0.5, 3.0, 10.0):
        assert c_function(LevySpec(a=0.7), s) == pytest.approx(0.7)
    assert c_function(LevySpec.from_drift(0.2, jumps=ExpJumps(3.0, 2.0)), 0.0) == pytest.approx(0.2 + 1.5)
    with pytest.raises(ValueError):
        c_function(LevySpec(a=1.0), -1.0)


SPECS = [
    LevySpec(a=1.0, sigma2=1.0),
    LevySpec(a=-0.3, sigma2=2.0),
    LevySpec.from_drift(0.0, jumps=EXP11),
    LevySpec(a=0.5, sigma2=0.7, jumps=ExpJumps(2.0, 3.0)),
]


@pytest.mark.parametrize("spec", SPECS)
@pytest.mark.parametrize("s", [0.5, 1.0, 2.0, 3.0])
def test_c_function_agrees_with_exponent(spec, s):
    assert (-levy_exponent(spec, 1j * s) / s).real == pytest.approx(c_function(spec, s), abs=1e-10)


def test_is_subordinator():
    assert is_subordinator(LevySpec.from_drift(0.5, jumps=EXP11))
    assert not is_subordinator(LevySpec(a=1.0, sigma2=1.0))
    assert not is_subordinator(LevySpec.from_drift(-0.1, jumps=EXP11))


def test_spec_validation_and_json_round_trip():
    with pytest.raises(ValueError):
        LevySpec(sigma2=-1.0)
    with pytest.raises(ValueError):
        ExpJumps(0.0, 1.0)
    spec = LevySpec(a=0.25, sigma2=0.5, jumps=ExpJumps(2.0, 3.0))
    assert LevySpec.from_dict(spec.to_dict()) == spec
    via_mu = LevySpec.from_dict({"mu": 0.0, "jumps": {"type": "exp", "p": 1, "q": 1}})
    assert via_mu.mu == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        LevySpec.from_dict({"a": 1, "mu": 1})
    with pytest.raises(ValueError):
        LevySpec.from_dict({"a": 1, "jumps": {"type": "stable", "p": 1, "q": 1}})
    with pytest.raises(ValueError):
        LevySpec.from_dict({"a": 1, "b": 2})


def test_sample_path_determinism():
    spec = LevySpec(a=0.3, sigma2=0.5, jumps=ExpJumps(2.0, 1.0))
    a = sample_path(spec, 5.0, 0.01, 42)
    b = sample_path(spec, 5.0, 0.01, 42)
    np.testing.assert_array_equal(a.event_positions, b.event_positions)
    np.testing.assert_array_equal(a.event_jumps, b.event_jumps)
    np.testing.assert_array_equal(a.grid_increments, b.grid_increments)
    c = sample_path(spec, 5.0, 0.01, 43)
    assert not np.array_equal(a.grid_increments, c.grid_increments)


def test_sample_path_structure():
    spec = LevySpec(a=0.3, sigma2=0.5, jumps=ExpJumps(2.0, 1.0))
    rec = sample_path(spec, 5.0, 0.01, 1)
    assert np.all(np.diff(rec.event_positions) > 0)
    assert np.all((rec.event_positions >= 0) & (rec.event_positions <= 5.0))
    assert rec.grid_positions.size == grid_steps(5.0, 0.01) == 500
    assert rec.grid_positions[-1] == pytest.approx(5.0)
    total = rec.mu * 5.0 + rec.grid_increments.sum() + rec.event_jumps.sum()
    assert rec.terminal_value == pytest.approx(total)
    assert len(rec.events) == rec.event_positions.size


def test_pure_drift_terminal_value():
    rec = sample_path(LevySpec(a=0.8), 3.0, 0.1, 0)
    assert rec.terminal_value == pytest.approx(2.4)
    assert rec.events == [] and rec.grid == []


def test_poisson_event_count():
    spec = LevySpec.from_drift(0.0, jumps=ExpJumps(2.0, 1.0))
    counts = np.array([sample_path(spec, 10.0, 1.0, (3, i)).event_positions.size for i in range(4000)])
    se = counts.std(ddof=1) / math.sqrt(counts.size)
    assert abs(counts.mean() - 20.0) < 3 * se


def test_terminal_mean_matches_exponent_derivative():
    spec = LevySpec(a=0.3, sigma2=0.5, jumps=ExpJumps(2.0, 1.5))
    h = 1e-5
    deriv = (levy_exponent(spec, h) - levy_exponent(spec, -h)) / (2 * h)
    target = (-1j * deriv).real
    w = np.array([sample_path(spec, 1.0, 0.05, (11, i)).terminal_value for i in range(10_000)])
    se = w.std(ddof=1) / math.sqrt(w.size)
    assert abs(w.mean() - target) < 3 * se


@given(st.floats(-3, 3), st.floats(0, 4), st.floats(0.1, 5), st.floats(0.1, 5), st.floats(0.0, 6.0))
@settings(max_examples=50, deadline=None)
def test_c_function_closed_form_property(a, sigma2, p, q, s):
    spec = LevySpec(a=a, sigma2=sigma2, jumps=ExpJumps(p, q))
    assert c_function(spec, s) == pytest.approx(spec.mu - sigma2 * s / 2 + p / (q + s), abs=1e-12)


def test_path_record_defaults():
    rec = PathRecord(horizon=1.0, mu=0.0, event_positions=np.zeros(0), event_jumps=np.zeros(0))
    assert rec.terminal_value == 0.0
