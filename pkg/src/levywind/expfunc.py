"""Exponential functionals of Levy paths and the Riccati flow.

The Riccati variable obeys ``Z' = 1 - k^2 Z^2 - w Z`` with ``w = W'``. Between
jumps of ``W`` the flow is solved exactly; a jump of size ``dW`` maps
``Z -> Z exp(-dW)``; a Brownian part is integrated in the Stratonovich sense
with Heun steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .levy import LevySpec, PathRecord, c_function, draw_jumps, grid_steps
from .parallel import map_blocks
from .stats import replica_rng

DEFAULT_DX = 1e-3


@dataclass(frozen=True)
class RiccatiSample:
    value: float
    energy: float
    burn_in: float


def exp_functional(path: PathRecord):
    """I_t = int_0^t exp(-W(s)) ds for a sampled path.

    Exact between jumps when there is no Brownian part; with one, the
    trapezoidal rule on the grid (jumps split the cells they fall in).
    """
    mu = path.mu
    if path.grid_increments.size == 0:
        pos = path.event_positions
        knots = np.concatenate([[0.0], pos, [path.horizon]])
        gaps = np.diff(knots)
        jumps = np.concatenate([path.event_jumps, [0.0]])
        return float(kernels.exp_functional_events(mu, np.array([0, gaps.size]), gaps, jumps)[0])

    gpos = np.concatenate([[0.0], path.grid_positions])
    bvals = np.concatenate([[0.0], np.cumsum(path.grid_increments)])
    knots = np.union1d(gpos, path.event_positions)
    brown = np.interp(knots, gpos, bvals)
    # jump part just before / just after each knot
    before = np.searchsorted(path.event_positions, knots, side="left")
    after = np.searchsorted(path.event_positions, knots, side="right")
    csum = np.concatenate([[0.0], np.cumsum(path.event_jumps)])
    w_left = mu * knots + brown + csum[before]
    w_right = mu * knots + brown + csum[after]
    seg = np.diff(knots)
    return float(np.sum(0.5 * seg * (np.exp(-w_right[:-1]) + np.exp(-w_left[1:]))))


def riccati_flow_segment(z0, k, mu, dx):
    """Exact solution of Z' = 1 - k^2 Z^2 - mu Z at length ``dx`` from ``z0``."""
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    return float(kernels.flow(float(z0), float(dx), float(k), float(mu)))


def riccati_jump(z, dW):
    return z * math.exp(-dW)


def fixed_point(k, mu):
    """Positive root z+ of 1 - mu z - k^2 z^2 (``inf`` when it does not exist)."""
    if k == 0:
        return 1.0 / mu if mu > 0 else math.inf
    kappa = math.sqrt(mu * mu + 4 * k * k)
    return 2.0 / (mu + kappa) if mu >= 0 else (kappa - mu) / (2 * k * k)


def default_burn_in(spec: LevySpec, k):
    """30 relaxation lengths: 30 / c(0), or 30 / sqrt(c(0)^2 + 4k^2) when c(0) <= 0."""
    c0 = c_function(spec, 0.0)
    if c0 > 0:
        return 30.0 / c0
    if k > 0:
        return 30.0 / math.sqrt(c0 * c0 + 4 * k * k)
    raise ValueError("no stationary Riccati law: k = 0 and c(0) <= 0")


def _replica_block(spec, k, length, dx, base_seed, z0, exp_rate, start, stop, want):
    rngs = [replica_rng(base_seed, i) for i in range(start, stop)]
    return _terminal(spec, k, length, dx, z0, exp_rate, rngs, want)


def _terminal(spec, k, length, dx, z0, exp_rate, rngs, want):
    """Terminal Riccati values (want='riccati') or I_T (want='expfunc'), one per stream."""
    mu = spec.mu
    n = len(rngs)
    horizons = np.full(n, float(length)) if exp_rate is None else np.array(
        [rng.exponential(1.0 / exp_rate) for rng in rngs]
    )
    events = [draw_jumps(rng, spec.jumps, h) for rng, h in zip(rngs, horizons)]

    if spec.sigma2 == 0:
        counts = np.array([e[0].size + 1 for e in events], dtype=np.int64)
        offsets = np.concatenate([[0], np.cumsum(counts)])
        gaps = np.concatenate(
            [np.diff(np.concatenate([[0.0], pos, [h]])) for (pos, _), h in zip(events, horizons)]
        )
        jumps = np.concatenate([np.concatenate([size, [0.0]]) for _, size in events])
        if want == "expfunc":
            return kernels.exp_functional_events(mu, offsets, gaps, jumps)
        return kernels.riccati_events(np.full(n, float(z0)), float(k), mu, offsets, gaps, jumps)

    if exp_rate is not None:
        raise ValueError("random horizons are only supported without a Brownian part")
    steps = grid_steps(length, dx)
    h = length / steps
    dB = np.empty((n, steps))
    for r, rng in enumerate(rngs):
        dB[r] = math.sqrt(h) * rng.standard_normal(steps)
    logjump = np.zeros((0, 0))
    if spec.jumps is not None:
        logjump = np.zeros((n, steps))
        for r, (pos, size) in enumerate(events):
            idx = np.minimum((pos / h).astype(np.int64), steps - 1)
            np.add.at(logjump[r], idx, size)
    if want == "expfunc":
        if spec.jumps is not None:
            raise NotImplementedError("grid functional with jumps: use exp_functional on sample_path")
        return kernels.exp_functional_grid(mu, spec.sigma, h, dB)
    return kernels.riccati_heun(np.full(n, float(z0)), float(k), mu, spec.sigma, h, dB, logjump)


def riccati_batch(spec: LevySpec, k, length, n, base_seed, dx=DEFAULT_DX, z0=0.0,
                  threads=1, block=None):
    """Z(length) for ``n`` independent replicas started at ``z0``.

    Replica ``i`` uses the stream ``(base_seed, i)``; its path is the one
    :func:`levywind.levy.sample_path` returns for that seed.
    """
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    if block is None:
        block = 4096 if spec.sigma2 == 0 else max(1, min(1024, int(2e6 // grid_steps(length, dx))))
    fn = lambda a, b: _replica_block(spec, k, length, dx, base_seed, z0, None, a, b, "riccati")
    return map_blocks(fn, n, block, threads)


def stationary_riccati_batch(spec: LevySpec, k, n, base_seed, burn_in=None, dx=DEFAULT_DX,
                             threads=1):
    """``n`` independent draws of Z_inf (terminal values of replicas started at 0)."""
    if burn_in is None:
        burn_in = default_burn_in(spec, k)
    return riccati_batch(spec, k, burn_in, n, base_seed, dx=dx, threads=threads)


def sample_stationary_riccati(spec: LevySpec, k, burn_in=None, dx=DEFAULT_DX, seed=0):
    """One draw of Z_inf: start at 0 and integrate along a path of length ``burn_in``.

    ``seed=(base, i)`` reproduces replica ``i`` of :func:`stationary_riccati_batch`.
    """
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    if burn_in is None:
        burn_in = default_burn_in(spec, k)
    if not burn_in > 0:
        raise ValueError(f"burn_in must be positive, got {burn_in}")
    z = _terminal(spec, k, burn_in, dx, 0.0, None, [replica_rng(seed)], "riccati")[0]
    return RiccatiSample(value=float(z), energy=-k * k, burn_in=float(burn_in))


def exp_functional_batch(spec: LevySpec, horizon, n, base_seed, dx=DEFAULT_DX, exp_rate=None,
                         threads=1):
    """I_T for ``n`` replicas; T = ``horizon`` or, with ``exp_rate``, T ~ Exp(rate) per replica."""
    if spec.sigma2 > 0:
        block = max(1, min(1024, int(2e6 // grid_steps(horizon, dx))))
    else:
        block = 4096
    fn = lambda a, b: _replica_block(spec, 0.0, horizon, dx, base_seed, 0.0, exp_rate, a, b, "expfunc")
    return map_blocks(fn, n, block, threads)


def default_dufresne_horizon(mu):
    return 40.0 / mu


def sample_dufresne(mu, horizon=None, dx=DEFAULT_DX, seed=0):
    """One draw of int_0^horizon exp(-mu t - B_t) dt (approximates I_inf)."""
    if not mu > 0:
        raise ValueError(f"mu must be positive, got {mu}")
    if horizon is None:
        horizon = default_dufresne_horizon(mu)
    steps = grid_steps(horizon, dx)
    h = horizon / steps
    rng = replica_rng(seed)
    dB = (math.sqrt(h) * rng.standard_normal(steps))[None, :]
    return float(kernels.exp_functional_grid(mu, 1.0, h, dB)[0])


def dufresne_batch(mu, n, base_seed, horizon=None, dx=DEFAULT_DX, threads=1):
    """``n`` draws of :func:`sample_dufresne`; replica ``i`` uses seed ``(base_seed, i)``."""
    if not mu > 0:
        raise ValueError(f"mu must be positive, got {mu}")
    if horizon is None:
        horizon = default_dufresne_horizon(mu)
    spec = LevySpec(a=mu, sigma2=1.0)
    return exp_functional_batch(spec, horizon, n, base_seed, dx=dx, threads=threads)


def riccati_euler_ito(z0, k, mu, sigma, dx, dB):
    """Euler-Maruyama on the Ito form dZ = (1 - k^2 Z^2 - mu Z + sigma^2 Z / 2) dx - sigma Z dB."""
    z = np.array(z0, dtype=float, copy=True)
    dB = np.asarray(dB, dtype=float)
    for j in range(dB.shape[1]):
        z = z + (1.0 - k * k * z * z - mu * z + 0.5 * sigma * sigma * z) * dx - sigma * z * dB[:, j]
    return z


def reversed_path(path: PathRecord):
    """The path s -> W(t) - W((t - s)-), which has the same law as W."""
    t = path.horizon
    rec = PathRecord(
        horizon=t,
        mu=path.mu,
        event_positions=(t - path.event_positions)[::-1].copy(),
        event_jumps=path.event_jumps[::-1].copy(),
    )
    if path.grid_increments.size:
        rec.grid_positions = path.grid_positions.copy()
        rec.grid_increments = path.grid_increments[::-1].copy()
    return rec
