import math

import numpy as np
import pytest

from levywind import densities, expfunc, moments, stats
from levywind.levy import ExpJumps, LevySpec, c_function

SUB = LevySpec.from_drift(0.0, jumps=ExpJumps(1.0, 1.0))


def test_pure_drift_closed_forms():
    assert moments.pure_drift_omega(0.0, 1.0) == pytest.approx(1.0)
    assert moments.pure_drift_omega(1.0, 1.0) == pytest.approx(math.sqrt(5) / 2, rel=1e-15)
    r = moments.continued_fraction_omega(LevySpec(a=1.0), 1.0)
    assert r.omega == pytest.approx(math.sqrt(5) / 2, rel=1e-12)
    assert r.gamma == r.omega and r.idos == 0.0 and r.energy == -1.0


@pytest.mark.parametrize("start", moments.START_VALUES)
def test_pure_drift_ratios_equal_fixed_point(start):
    mu, k = 0.7, 1.3
    tab = moments.stationary_moment_ratios(LevySpec(a=mu), k, 6, start=start)
    np.testing.assert_allclose(tab.ratios[1:], expfunc.fixed_point(k, mu), rtol=1e-10)
    assert tab.values[0] == 1.0


def test_zero_energy_decoupled_example():
    # c(s) = mu - s/2 with mu = 1: first moment 1/c(1) = 2
    spec = LevySpec(a=1.0, sigma2=1.0)
    tab = moments.stationary_moment_ratios(spec, 0.0, 1)
    assert tab.values[1] == pytest.approx(2.0)
    with pytest.raises(moments.DivergentMoment):
        moments.stationary_moment_ratios(spec, 0.0, 2)


@pytest.mark.parametrize("k", [0.25, 0.5, 1.0, 2.0])
def test_continued_fraction_matches_quadrature(k):
    om = moments.continued_fraction_omega(SUB, k).omega
    ref = moments.omega_from_mean(SUB, k, densities.for_spec(SUB, k).mean()).omega
    assert om == pytest.approx(ref, abs=1e-9)


def test_moments_match_density():
    k = 1.0
    d = densities.for_spec(SUB, k)
    tab = moments.stationary_moment_ratios(SUB, k, 3)
    assert tab.values[1] == pytest.approx(d.mean(), rel=1e-9)
    assert tab.values[1] == pytest.approx(0.75193839, abs=1e-8)
    m2 = densities._moment(d, 2)
    assert tab.values[2] == pytest.approx(m2, rel=1e-8)


def test_zero_start_convergents_alternate():
    k = 1.0
    exact = moments.continued_fraction_omega(SUB, k).omega
    c0 = c_function(SUB, 0.0)
    vals = [c0 / 2 + moments.continued_fraction_tail(SUB, k, n, start="zero") for n in range(1, 12)]
    signs = np.sign(np.array(vals) - exact)
    assert np.all(signs[1:] == -signs[:-1])
    assert abs(vals[-1] - exact) < abs(vals[0] - exact)


def test_zero_start_nonconvergence():
    with pytest.raises(moments.NonConvergence):
        moments.continued_fraction_omega(SUB, 2.0, tol=1e-10, max_depth=4096, start="zero")


def test_bertoin_yor_pure_drift_and_small_lambda():
    mu, lam = 0.6, 1.3
    spec = LevySpec(a=mu)
    assert moments.bertoin_yor_moment(spec, lam, 1) == pytest.approx(1 / (lam + mu))
    assert moments.bertoin_yor_moment(spec, lam, 2) == pytest.approx(2 / ((lam + mu) * (lam + 2 * mu)))
    assert moments.bertoin_yor_moment(spec, lam, 0) == 1.0
    # lam -> 0: prod j/(j c(j)) is the k = 0 stationary moment
    spec = LevySpec.from_drift(0.5, jumps=ExpJumps(1.0, 1.0))
    small = moments.bertoin_yor_moment(spec, 1e-12, 2)
    assert small == pytest.approx(moments.stationary_moment_ratios(spec, 0.0, 2).values[2], rel=1e-9)


def test_bertoin_yor_monte_carlo():
    spec = LevySpec.from_drift(0.5, jumps=ExpJumps(1.0, 1.0))
    lam = 1.0
    x = expfunc.exp_functional_batch(spec, 0.0, 20_000, 31, exp_rate=lam)
    for s in (1, 2):
        m, se = stats.mean_with_se(x**s)
        assert abs(m - moments.bertoin_yor_moment(spec, lam, s)) < 4 * se


def test_argument_validation():
    with pytest.raises(ValueError):
        moments.stationary_moment_ratios(LevySpec(a=1.0, sigma2=1.0), 1.0, 2)
    with pytest.raises(ValueError):
        moments.stationary_moment_ratios(SUB, 1.0, 0)
    with pytest.raises(ValueError):
        moments.stationary_moment_ratios(SUB, 1.0, 2, start="bogus")
    with pytest.raises(ValueError):
        moments.continued_fraction_omega(SUB, 0.0)
    with pytest.raises(ValueError):
        moments.bertoin_yor_moment(SUB, 0.0, 1)
    with pytest.raises(ValueError):
        moments.bertoin_yor_moment(SUB, 1.0, 1.5)
    with pytest.raises(ValueError):
        moments.lyapunov_decompose(1.0, 0.5)
    with pytest.raises(ValueError):
        moments.omega_from_mean(SUB, 1.0, -1.0)


def test_omega_from_mean_se_scaling():
    r = moments.omega_from_mean(SUB, 2.0, 0.5, method="monte_carlo", se=0.01)
    assert r.se == pytest.approx(0.04) and r.method == "monte_carlo"
