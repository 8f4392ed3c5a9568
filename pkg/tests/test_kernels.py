import importlib.util
import math
from pathlib import Path

import numpy as np
import pytest

from levywind import kernels

BACKENDS = kernels.available_backends()
needs_both = pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled extension not built")


def _bench():
    path = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"
    spec = importlib.util.spec_from_file_location("bench_kernels", path)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


def test_backend_choice():
    assert kernels.BACKEND in BACKENDS
    assert kernels.flow is getattr(BACKENDS[kernels.BACKEND], "flow")


@needs_both
@pytest.mark.parametrize("name", ["riccati_events", "exp_functional_events", "riccati_heun",
                                  "exp_functional_grid", "winding_walk", "winding_raster",
                                  "boundary_mask"])
def test_compiled_matches_pure(name):
    cases = dict(_bench().cases(0.05))
    fn = cases[name]
    a = np.asarray(fn(BACKENDS["pure"]), dtype=float)
    b = np.asarray(fn(BACKENDS["compiled"]), dtype=float)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)


@needs_both
def test_raster_cuts_agree():
    b = np.array([[0.0, 0.0], [1.0, 0.2], [0.3, 1.1], [-0.5, 0.4], [0.6, -0.3], [0.0, 0.0]])
    outs = [m.winding_raster(b[:, 0].copy(), b[:, 1].copy(), -1.0, -1.0, 3.0 / 64, 64) for m in BACKENDS.values()]
    for x, y in zip(outs[0], outs[1]):
        np.testing.assert_array_equal(np.asarray(x), np.asarray(y))


@needs_both
def test_heun_with_jumps_agree():
    rng = np.random.default_rng(0)
    dB = math.sqrt(1e-3) * rng.standard_normal((5, 300))
    lj = np.where(rng.random((5, 300)) < 0.01, rng.exponential(1.0, (5, 300)), 0.0)
    a = BACKENDS["pure"].riccati_heun(np.zeros(5), 1.0, 0.2, 1.0, 1e-3, dB, lj)
    b = BACKENDS["compiled"].riccati_heun(np.zeros(5), 1.0, 0.2, 1.0, 1e-3, dB, lj)
    np.testing.assert_allclose(a, b, rtol=1e-13)


@needs_both
def test_points_agree():
    s = np.linspace(0, 4 * math.pi, 301)
    xs, ys = np.cos(s) * (1 + 0.3 * s), np.sin(s)
    xs[-1], ys[-1] = xs[0], ys[0]
    px, py = np.random.default_rng(1).uniform(-5, 5, (2, 500))
    a = BACKENDS["pure"].winding_points(xs, ys, px, py)
    b = BACKENDS["compiled"].winding_points(xs, ys, px, py)
    np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_flow_scalar_and_array(name):
    m = BACKENDS[name]
    z = np.array([0.0, 0.3, 1.0])
    out = m.flow(z, 0.5, 1.0, 0.2)
    assert out.shape == (3,)
    assert m.flow(0.3, 0.5, 1.0, 0.2) == pytest.approx(out[1], rel=1e-15)
