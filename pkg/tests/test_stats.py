import math

import numpy as np
import pytest
from scipy import stats as sps

from levywind import stats


def test_replica_rng_forms_agree():
    a = stats.replica_rng(5, 3).standard_normal(4)
    b = stats.replica_rng((5, 3)).standard_normal(4)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, stats.replica_rng(5, 4).standard_normal(4))


def test_mean_with_se():
    m, se = stats.mean_with_se([2.0] * 50)
    assert (m, se) == (2.0, 0.0)
    m, se = stats.mean_with_se([1.0, 3.0])
    assert m == 2.0 and se == pytest.approx(1.0)
    assert stats.mean_with_se([4.0]) == (4.0, 0.0)
    with pytest.raises(ValueError):
        stats.mean_with_se([])


def test_ks_matches_scipy():
    x = stats.replica_rng(1).standard_normal(500)
    ref = sps.kstest(x, "norm").statistic
    assert stats.ks_statistic(x, sps.norm.cdf) == pytest.approx(ref, rel=1e-12)
    y = stats.replica_rng(2).standard_normal(300) + 0.1
    assert stats.ks_two_sample(x, y) == pytest.approx(sps.ks_2samp(x, y).statistic, rel=1e-12)


def test_ks_single_point():
    assert stats.ks_statistic([0.0], sps.norm.cdf) == pytest.approx(0.5)


def test_gamma_sampler_mean():
    x = stats.sample_gamma(2.5, 11, size=40_000)
    m, se = stats.mean_with_se(x)
    assert abs(m - 2.5) < 4 * se
    with pytest.raises(ValueError):
        stats.sample_gamma(0.0, 1)


def test_gamma_reciprocal_cdf_half():
    # 2 mu = 1: P(2 / Gamma_1 <= x) = P(Gamma_1 >= 2/x) = e^{-2/x}
    xs = np.array([0.1, 0.5, 1.0, 3.0, 40.0])
    np.testing.assert_allclose(stats.gamma_reciprocal_cdf(0.5, xs), np.exp(-2 / xs), rtol=1e-13)
    assert stats.gamma_reciprocal_cdf(1.0, 0.0) == 0.0
    with pytest.raises(ValueError):
        stats.gamma_reciprocal_cdf(-1.0, 1.0)


def test_gamma_reciprocal_cdf_matches_invgamma():
    xs = np.geomspace(0.05, 50, 30)
    np.testing.assert_allclose(stats.gamma_reciprocal_cdf(1.3, xs), sps.invgamma(2.6, scale=2.0).cdf(xs), rtol=1e-11)


def test_cauchy_cdf():
    assert stats.cauchy_cdf(0.0) == 0.5
    assert stats.cauchy_cdf(1.0) == pytest.approx(0.75)


def test_l1_distance_from_histogram():
    x = stats.replica_rng(3).standard_normal(200_000)
    edges = np.linspace(-4, 4, 81)
    counts, _ = np.histogram(x, edges)
    d = stats.l1_density_distance((counts, edges, x.size), sps.norm.cdf)
    assert d < 0.02
    d_bad = stats.l1_density_distance((counts, edges, x.size), sps.norm(0.5).cdf)
    assert d_bad > 0.3


def test_l1_distance_counts_outside_mass():
    edges = np.array([0.0, 1.0])
    # everything in the bin, model puts half outside
    assert stats.l1_density_distance((np.array([10]), edges), lambda e: np.array([0.0, 0.5])[: len(e)]) == pytest.approx(1.0)


def test_hill_pareto_and_cauchy():
    rng = stats.replica_rng(4)
    pareto = rng.pareto(1.5, 200_000) + 1.0
    assert stats.hill_tail_index(pareto, 0.05) == pytest.approx(1.5, rel=0.05)
    cauchy = rng.standard_cauchy(200_000)
    assert stats.hill_tail_index(cauchy, 0.02) == pytest.approx(1.0, rel=0.07)
    with pytest.raises(ValueError):
        stats.hill_tail_index(pareto, 0.7)
    with pytest.raises(ValueError):
        stats.hill_tail_index([1.0, 2.0], 0.1)


def test_report_is_append_only():
    r = stats.ExperimentReport(seeds=[1])
    r.add_estimate("x", 1.0, 0.1, 10)
    r.add_samples("y", [1.0, 1.0, 1.0])
    r.add_gof("ks", 0.01)
    with pytest.raises(KeyError):
        r.add_estimate("x", 2.0, 0.1, 10)
    with pytest.raises(KeyError):
        r.add_gof("ks", 0.02)
    d = r.to_dict()
    assert d["estimates"]["y"] == {"value": 1.0, "se": 0.0, "n_samples": 3}
    assert d["gof"] == {"ks": 0.01} and d["seeds"] == [1]
    assert '"x"' in r.to_json()


def test_sample_moment():
    assert stats.sample_moment([1.0, 2.0, 3.0], 2) == pytest.approx(14 / 3)
