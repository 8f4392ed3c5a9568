import math

import numpy as np
import pytest

from levywind import kernels, stats, winding


def _circle(r=1.0, m=4000, turns=1, cw=False, center=(0.0, 0.0)):
    s = np.linspace(0.0, 2 * math.pi * turns, m * turns + 1)
    if cw:
        s = -s
    p = np.column_stack([center[0] + r * np.cos(s), center[1] + r * np.sin(s)])
    p[-1] = p[0]
    return p


# Brownian winding


def test_reference_matches_batch(backend):
    t, base = 100.0, 5
    big, small, steps, skips = winding.winding_batch(t, 4, base)
    # numpy's vectorised arctan2 may differ from libm in the last ulp
    tol = 0.0 if backend == "compiled" else 1e-12
    for i in range(4):
        tr = winding.sample_winding_angle(t, seed=(base, i))
        assert tr.big_angle == pytest.approx(big[i], rel=tol, abs=tol)
        assert tr.small_angle == pytest.approx(small[i], rel=tol, abs=tol)
        assert tr.steps == steps[i] and tr.skips == skips[i]


def test_batch_thread_invariance():
    a = winding.winding_batch(50.0, 40, 2, threads=1, block=8)
    b = winding.winding_batch(50.0, 40, 2, threads=3, block=8)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x, y)


def test_recorded_increments_partition_the_angle():
    tr = winding.sample_winding_angle(1e3, seed=9, record=True, r_star=0.5)
    assert math.fsum(tr.increments[:, 0]) == pytest.approx(tr.total_angle, abs=1e-9)
    big, small = winding.split_windings(tr.increments, 0.5)
    assert big == pytest.approx(tr.big_angle, abs=1e-9)
    assert small == pytest.approx(tr.small_angle, abs=1e-9)
    assert tr.total_angle == pytest.approx(tr.big_angle + tr.small_angle, rel=1e-15, abs=1e-15)
    # another threshold still partitions
    b2, s2 = winding.split_windings(tr.increments, 3.0)
    assert b2 + s2 == pytest.approx(tr.total_angle, abs=1e-9)


def test_angle_is_symmetric():
    big, small, _, _ = winding.winding_batch(100.0, 3000, 13)
    m, se = stats.mean_with_se(big + small)
    assert abs(m) < 4 * se
    q = np.quantile(big + small, [0.1, 0.9])
    assert q[0] == pytest.approx(-q[1], rel=0.15)


def test_brownian_scaling():
    # (t, r0, r*) -> (c^2 t, c r0, c r*) leaves the angle law unchanged
    n = 1000
    a = winding.winding_batch(100.0, n, 3)
    b = winding.winding_batch(400.0, n, 3, r0=2.0, r_star=2.0)
    ta, tb = a[0] + a[1], b[0] + b[1]
    assert stats.ks_two_sample(ta, tb) < 0.02


def test_spitzer_statistic():
    assert winding.spitzer_statistic([math.log(100.0)], 100.0)[0] == pytest.approx(2.0)


def test_walk_argument_checks():
    with pytest.raises(ValueError):
        winding.sample_winding_angle(-1.0)
    with pytest.raises(ValueError):
        winding.sample_winding_angle(1.0, r0=0.0)
    with pytest.raises(ValueError):
        winding.winding_batch(1.0, 2, 0, eps=0.0)
    with pytest.raises(ValueError):
        winding.split_windings(np.zeros((1, 2)), 0.0)


# bridges


def test_bridge_endpoints_and_shape():
    b = winding.sample_bridge(2.0, 64, 1)
    assert b.shape == (65, 2)
    np.testing.assert_array_equal(b[0], [0.0, 0.0])
    np.testing.assert_array_equal(b[-1], b[0])
    with pytest.raises(ValueError):
        winding.sample_bridge(1.0, 2, 0)


def test_bridge_covariance():
    t, m = 2.0, 16
    pts = np.array([winding.sample_bridge(t, m, (4, i)) for i in range(4000)])
    s = np.array([4, 8]) / m
    var = pts[:, [4, 8], :].var(axis=0).mean(axis=1)
    np.testing.assert_allclose(var, t * s * (1 - s), rtol=0.06)
    cov = np.mean(pts[:, 4, 0] * pts[:, 8, 0])
    assert cov == pytest.approx(t * 0.25 * (1 - 0.5), abs=0.04)


def test_hierarchy_refines():
    levels = winding.bridge_hierarchy(1.0, 32, 2, 6)
    np.testing.assert_array_equal(levels[0], winding.sample_bridge(1.0, 32, 6))
    assert [lv.shape[0] for lv in levels] == [33, 65, 129]
    np.testing.assert_array_equal(levels[1][0::2], levels[0])
    np.testing.assert_array_equal(levels[2][0::2], levels[1])


def test_refined_midpoint_variance():
    t, m = 1.0, 4
    rng = stats.replica_rng(3)
    base = np.zeros((m + 1, 2))
    mids = np.array([winding.refine_bridge(base, t, rng)[1] for _ in range(20_000)])
    assert mids.var(axis=0).mean() == pytest.approx(t / m / 4, rel=0.03)


# winding fields


def test_points_index():
    c = _circle()
    px = np.array([0.0, 0.5, 2.0, -3.0])
    py = np.array([0.0, 0.2, 0.0, 1.0])
    np.testing.assert_array_equal(kernels.winding_points(c[:, 0], c[:, 1], px, py), [1, 1, 0, 0])
    c2 = _circle(turns=2, cw=True)
    np.testing.assert_array_equal(kernels.winding_points(c2[:, 0], c2[:, 1], px, py), [-2, -2, 0, 0])


def test_circle_field(backend):
    f = winding.winding_field(_circle(), resolution=400)
    assert set(f.sector_areas) == {1}
    assert f.sector_areas[1] == pytest.approx(math.pi, rel=0.01)
    assert f.zero_sector_inside == 0.0
    g = winding.winding_field(_circle(cw=True), resolution=400)
    assert g.sector_areas[-1] == pytest.approx(f.sector_areas[1])


def test_figure_eight():
    s = np.linspace(0.0, 2 * math.pi, 8001)
    p = np.column_stack([np.sin(s), np.sin(s) * np.cos(s)])
    p[-1] = p[0]
    f = winding.winding_field(p, resolution=512)
    assert set(f.sector_areas) == {-1, 1}
    assert f.sector_areas[1] == pytest.approx(f.sector_areas[-1], rel=0.02)
    assert f.sector_areas[1] == pytest.approx(2 / 3, rel=0.02)
    assert abs(f.algebraic_area) < 0.01
    ex = winding.polygon_sectors(p)
    assert ex.sector_areas[1] == pytest.approx(2 / 3, rel=1e-4)


def _annulus_loop():
    # ccw around radius 2, then cw around radius 1: index 1 on the annulus, 0 in the hole
    outer = _circle(2.0)
    inner = _circle(1.0, cw=True)
    return np.vstack([outer, inner, outer[:1]])


def test_enclosed_zero_sector():
    p = _annulus_loop()
    f = winding.winding_field(p, resolution=512)
    assert f.sector_areas[1] == pytest.approx(3 * math.pi, rel=0.01)
    assert f.zero_sector_inside == pytest.approx(math.pi, rel=0.02)
    assert f.arithmetic_area == pytest.approx(4 * math.pi, rel=0.01)
    ex = winding.polygon_sectors(p)
    assert ex.zero_sector_inside == pytest.approx(math.pi, rel=1e-5)
    assert ex.sector_areas[1] == pytest.approx(3 * math.pi, rel=1e-5)


def test_bridge_field_matches_shoelace_and_exact():
    b = winding.sample_bridge(1.0, 2**12, 2)
    f = winding.winding_field(b, resolution=512)
    shoe = winding.shoelace_area(b)
    ex = winding.polygon_sectors(b)
    assert ex.algebraic_area == pytest.approx(shoe, rel=1e-9, abs=1e-12)
    assert abs(f.algebraic_area - shoe) < 0.02 * max(abs(shoe), ex.arithmetic_area)
    assert f.sector_areas.get(1, 0.0) == pytest.approx(ex.sector_areas.get(1, 0.0), rel=0.1, abs=2e-3)


def test_exclude_boundary_only_removes_area():
    b = winding.sample_bridge(1.0, 2**10, 8)
    full = winding.winding_field(b, resolution=256)
    cut = winding.winding_field(b, resolution=256, exclude_boundary=True)
    assert cut.arithmetic_area <= full.arithmetic_area
    assert full.boundary_area > 0
    np.testing.assert_array_equal(full.grid, cut.grid)


def test_field_validation():
    c = _circle()
    with pytest.raises(ValueError):
        winding.winding_field(c[:-1])
    with pytest.raises(ValueError):
        winding.winding_field(c, box=(0.0, 0.0, 0.5))
    with pytest.raises(ValueError):
        winding.winding_field(c, zero_links="leaky")
    with pytest.raises(ValueError):
        winding.polygon_sectors(c[:3])


def test_field_batch_thread_invariance():
    a = winding.field_batch(1.0, 4, 3, 256, 64, threads=1)
    b = winding.field_batch(1.0, 4, 3, 256, 64, threads=2)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x.grid, y.grid)


def test_sector_statistics_keys():
    fields = winding.field_batch(1.0, 3, 1, 256, 64)
    rep = winding.sector_statistics(fields, n_max=2)
    assert set(rep.estimates) == {"A_-2", "A_-1", "A_1", "A_2", "algebraic_area", "arithmetic_area", "A0_inside"}
    with pytest.raises(ValueError):
        winding.sector_statistics(fields[:1])


# sector expectations and the partition deficit


def test_sector_expectation_and_coefficients():
    assert winding.sector_expectation(1) == pytest.approx(1 / (2 * math.pi))
    assert winding.sector_expectation(-2, t=3.0) == pytest.approx(3 / (8 * math.pi))
    with pytest.raises(ValueError):
        winding.sector_expectation(0)
    # sum over n != 0 of t/(2 pi n^2) = pi t / 6 = arithmetic minus zero-sector coefficient
    assert winding.ARITHMETIC_AREA_COEF - winding.ZERO_SECTOR_COEF == pytest.approx(math.pi / 6)


def test_partition_deficit_values():
    assert winding.partition_deficit(0.0, 100) == 0.0
    assert winding.partition_deficit(1.0, 100) == pytest.approx(0.0, abs=1e-15)
    assert winding.partition_deficit_limit(0.5) == -0.125
    # n_max = 1 at alpha = 1/2: (cos pi - 1) / (2 pi^2)
    assert winding.partition_deficit(0.5, 1) == pytest.approx(-1 / math.pi**2)


@pytest.mark.parametrize("alpha", [0.1, 0.25, 0.5, 0.7, 1 / 3])
@pytest.mark.parametrize("n_max", [10, 1000, 100_000])
def test_partition_deficit_convergence_bound(alpha, n_max):
    err = abs(winding.partition_deficit(alpha, n_max) - winding.partition_deficit_limit(alpha))
    assert err <= 1 / (math.pi**2 * n_max)


def test_partition_deficit_symmetry():
    for a in (0.1, 0.3, 0.45):
        assert winding.partition_deficit(a, 5000) == pytest.approx(winding.partition_deficit(1 - a, 5000), abs=1e-12)
    with pytest.raises(ValueError):
        winding.partition_deficit(1.5, 10)
    with pytest.raises(ValueError):
        winding.partition_deficit(0.5, 0)
