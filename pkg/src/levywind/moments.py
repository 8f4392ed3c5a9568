"""Moment recursions for the Riccati variable and the complex Lyapunov exponent.

For E = -k^2 the stationary moments m(s) = E[Z_inf^s] satisfy

    -k^2 m(s+1) - c(s) m(s) + m(s-1) = 0,

whose forward solution is unstable. The physical solution is the minimal one,
obtained from the backward ratio recursion r_s = 1 / (c(s) + k^2 r_{s+1});
``c(0)/2 + k^2 r_1`` is then the continued fraction for Omega(-k^2).

Starting the recursion from r_S = 0 is the plain truncated fraction, whose
error decays only like S^(-2 nu) when c(s) -> 0 (e.g. mu = 0 with jumps).
The default start is instead the local fixed point of r = 1/(c(S) + k^2 r),
which matches the leading endpoint behaviour of the minimal solution and
converges geometrically faster in S.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .levy import LevySpec, c_function, is_subordinator


class NonConvergence(ArithmeticError):
    pass


class DivergentMoment(ArithmeticError):
    pass


@dataclass(frozen=True)
class LyapunovResult:
    energy: float
    omega: float
    gamma: float
    idos: float
    method: str
    se: float = 0.0


@dataclass(frozen=True)
class MomentTable:
    s_values: np.ndarray
    values: np.ndarray
    ratios: np.ndarray
    depth: int = 0


START_VALUES = ("fixed_point", "zero")


def _ratios(spec, k, depth, s_max, start="fixed_point"):
    """Backward recursion from r_{depth+1} = start down to r_1; returns r_1..r_{s_max}."""
    if start not in START_VALUES:
        raise ValueError(f"start must be one of {START_VALUES}, got {start!r}")
    k2 = k * k
    cs = c_function(spec, np.arange(1, depth + 2, dtype=float))
    if start == "zero":
        r = 0.0
    else:
        c = cs[depth]
        r = 2.0 / (c + math.sqrt(c * c + 4 * k2))
    out = np.empty(s_max)
    for s in range(depth, 0, -1):
        r = 1.0 / (cs[s - 1] + k2 * r)
        if s <= s_max:
            out[s - 1] = r
    return out


def _check_subordinator(spec):
    if not is_subordinator(spec):
        raise ValueError("the ratio recursion is only guaranteed for subordinators (sigma2 = 0, mu >= 0)")


def stationary_moment_ratios(spec: LevySpec, k, s_max, tol=1e-10, max_depth=1 << 22,
                             start="fixed_point"):
    """Moments m(0..s_max) of Z_inf as the minimal solution of the stationary recursion.

    With k = 0 the recursion decouples (m(s) = prod 1/c(j)) and any spec with
    c(1..s_max) > 0 is accepted; with k > 0 the spec must be a subordinator.
    """
    if s_max < 1:
        raise ValueError("s_max must be at least 1")
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    if k == 0:
        cs = c_function(spec, np.arange(1, s_max + 1, dtype=float))
        if np.any(cs <= 0):
            bad = int(np.argmax(cs <= 0)) + 1
            raise DivergentMoment(f"moment of order {bad} diverges (c({bad}) <= 0)")
        ratios = 1.0 / cs
        depth = s_max
    else:
        _check_subordinator(spec)
        depth = max(2 * s_max, 32)
        prev = _ratios(spec, k, depth, s_max, start)
        while True:
            depth *= 2
            if depth > max_depth:
                raise NonConvergence(f"continued fraction not converged at depth {depth // 2}")
            ratios = _ratios(spec, k, depth, s_max, start)
            if abs(ratios[0] - prev[0]) < tol:
                break
            prev = ratios
    values = np.concatenate([[1.0], np.cumprod(ratios)])
    return MomentTable(
        s_values=np.arange(s_max + 1), values=values,
        ratios=np.concatenate([[np.nan], ratios]), depth=depth,
    )


def continued_fraction_tail(spec: LevySpec, k, depth, start="fixed_point"):
    """k^2 / (c(1) + k^2 / (c(2) + ... + k^2 / (c(depth) + k^2 r))), r set by ``start``."""
    return k * k * _ratios(spec, k, depth, 1, start)[0]


def continued_fraction_omega(spec: LevySpec, k, tol=1e-10, max_depth=1 << 22,
                             start="fixed_point"):
    """Omega(-k^2) = c(0)/2 + k^2/(c(1) + k^2/(c(2) + ...)), deepened until stable to ``tol``."""
    if not k > 0:
        raise ValueError(f"continued_fraction_omega needs k > 0, got {k}")
    _check_subordinator(spec)
    c0 = c_function(spec, 0.0)
    depth = 16
    prev = c0 / 2 + continued_fraction_tail(spec, k, depth, start)
    while True:
        depth *= 2
        if depth > max_depth:
            raise NonConvergence(f"continued fraction not converged at depth {depth // 2}")
        om = c0 / 2 + continued_fraction_tail(spec, k, depth, start)
        if abs(om - prev) < tol:
            break
        prev = om
    gamma, idos = lyapunov_decompose(om, -k * k)
    return LyapunovResult(energy=-k * k, omega=om, gamma=gamma, idos=idos, method="continued_fraction")


def omega_from_mean(spec: LevySpec, k, mean_z, method="quadrature", se=0.0):
    """Omega(-k^2) = c(0)/2 + k^2 E(Z_inf) given an estimate of the mean."""
    if mean_z < 0:
        raise ValueError(f"mean_z must be nonnegative, got {mean_z}")
    c0 = c_function(spec, 0.0)
    om = c0 / 2 + k * k * mean_z
    gamma, idos = lyapunov_decompose(om, -k * k)
    return LyapunovResult(energy=-k * k, omega=om, gamma=gamma, idos=idos, method=method,
                          se=k * k * se)


def bertoin_yor_moment(spec: LevySpec, lam, s):
    """E[I_T^s] for T ~ Exp(lam): prod_{j=1..s} j / (lam + j c(j))."""
    if not lam > 0:
        raise ValueError(f"lam must be positive, got {lam}")
    if s < 0 or int(s) != s:
        raise ValueError(f"s must be a nonnegative integer, got {s}")
    _check_subordinator(spec)
    out = 1.0
    for j in range(1, int(s) + 1):
        out *= j / (lam + j * c_function(spec, float(j)))
    return out


def lyapunov_decompose(omega, energy):
    """Split Omega = gamma - i pi N for E <= 0, where Omega is real and N = 0."""
    if energy > 0:
        raise ValueError("positive energies (inside the spectrum) are not supported")
    return float(omega), 0.0


def pure_drift_omega(mu, k):
    """Closed form for W(x) = mu x: c(0)/2 + k^2 z+ with z+ = 2/(mu + sqrt(mu^2 + 4k^2))."""
    return mu / 2 + k * k * 2 / (mu + math.sqrt(mu * mu + 4 * k * k))
