"""Levy process specifications, their descriptors and exact path sampling.

A spec is ``W(x) = a x + sigma B_x + (jumps)`` in Levy-Khintchine form with
the ``y / (1 + y^2)`` truncation. The only jump family is
``Pi(dy) = p q exp(-q y) dy`` on ``y > 0``; everything downstream is keyed
off the exponent, the drift ``mu`` and ``c(s) = -Lambda(i s) / s``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import integrate

from .stats import replica_rng


@dataclass(frozen=True)
class ExpJumps:
    """Jump measure p q exp(-q y) dy on (0, inf): intensity p, mean size 1/q."""

    p: float
    q: float

    def __post_init__(self):
        if not (self.p > 0 and self.q > 0) or not (math.isfinite(self.p) and math.isfinite(self.q)):
            raise ValueError(f"jump parameters must be positive and finite, got p={self.p}, q={self.q}")


@dataclass(frozen=True)
class LevySpec:
    a: float = 0.0
    sigma2: float = 0.0
    jumps: ExpJumps | None = None

    def __post_init__(self):
        if not math.isfinite(self.a):
            raise ValueError(f"a must be finite, got {self.a}")
        if not (self.sigma2 >= 0 and math.isfinite(self.sigma2)):
            raise ValueError(f"sigma2 must be nonnegative and finite, got {self.sigma2}")

    @classmethod
    def from_drift(cls, mu, sigma2=0.0, jumps=None):
        """Spec whose drift coefficient equals ``mu`` (``a`` absorbs the compensator)."""
        return cls(a=mu + _compensator(jumps), sigma2=sigma2, jumps=jumps)

    @cached_property
    def compensator(self):
        """int y / (1 + y^2) Pi(dy), by adaptive quadrature."""
        return _compensator(self.jumps)

    @property
    def mu(self):
        return self.a - self.compensator

    @property
    def sigma(self):
        return math.sqrt(self.sigma2)

    def to_dict(self):
        d = {"a": self.a, "sigma2": self.sigma2, "jumps": None}
        if self.jumps is not None:
            d["jumps"] = {"type": "exp", "p": self.jumps.p, "q": self.jumps.q}
        return d

    @classmethod
    def from_dict(cls, d):
        """Parse the JSON form; ``"mu"`` may replace ``"a"`` for convenience."""
        if not isinstance(d, dict):
            raise ValueError("LevySpec must be a JSON object")
        unknown = set(d) - {"a", "mu", "sigma2", "jumps"}
        if unknown:
            raise ValueError(f"unknown LevySpec keys: {sorted(unknown)}")
        jumps = None
        j = d.get("jumps")
        if j is not None:
            if j.get("type", "exp") != "exp":
                raise ValueError(f"unsupported jump family {j.get('type')!r}")
            jumps = ExpJumps(float(j["p"]), float(j["q"]))
        sigma2 = float(d.get("sigma2", 0.0))
        if "a" in d and "mu" in d:
            raise ValueError("give either 'a' or 'mu', not both")
        if "mu" in d:
            return cls.from_drift(float(d["mu"]), sigma2, jumps)
        return cls(float(d.get("a", 0.0)), sigma2, jumps)


_COMP_CACHE: dict = {}


def _compensator(jumps):
    if jumps is None:
        return 0.0
    key = (jumps.p, jumps.q)
    if key not in _COMP_CACHE:
        p, q = jumps.p, jumps.q
        val, _ = integrate.quad(
            lambda y: y / (1.0 + y * y) * math.exp(-q * y), 0.0, math.inf,
            epsabs=1e-13, epsrel=1e-12, limit=200,
        )
        _COMP_CACHE[key] = p * q * val
    return _COMP_CACHE[key]


def levy_exponent(spec: LevySpec, theta):
    """Lambda(theta) with E exp(i theta W(t)) = exp(t Lambda(theta)); complex theta allowed."""
    th = np.asarray(theta, dtype=complex)
    out = 1j * spec.a * th - 0.5 * spec.sigma2 * th * th
    if spec.jumps is not None:
        p, q = spec.jumps.p, spec.jumps.q
        # int (e^{i th y} - 1) p q e^{-q y} dy = p i th / (q - i th)
        out = out + p * 1j * th / (q - 1j * th) - 1j * th * spec.compensator
    return complex(out) if out.ndim == 0 else out


def drift_coefficient(spec: LevySpec):
    return spec.mu


def c_function(spec: LevySpec, s):
    """c(s) = -Lambda(i s) / s, with its limit at s = 0."""
    sa = np.asarray(s, dtype=float)
    if np.any(sa < 0) or np.any(~np.isfinite(sa)):
        raise ValueError("c_function is defined for finite s >= 0")
    out = spec.mu - 0.5 * spec.sigma2 * sa
    if spec.jumps is not None:
        out = out + spec.jumps.p / (spec.jumps.q + sa)
    return float(out) if out.ndim == 0 else out


def is_subordinator(spec: LevySpec):
    return spec.sigma2 == 0 and spec.mu >= 0


@dataclass
class PathRecord:
    """One sampled path on [0, horizon], W(0) = 0.

    Jumps are event-exact; the Brownian part (if any) is stored as increments
    ``sigma * dB`` on a uniform grid whose right endpoints are ``grid_positions``.
    """

    horizon: float
    mu: float
    event_positions: np.ndarray
    event_jumps: np.ndarray
    grid_positions: np.ndarray = field(default_factory=lambda: np.zeros(0))
    grid_increments: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def terminal_value(self):
        return self.mu * self.horizon + float(np.sum(self.grid_increments)) + float(np.sum(self.event_jumps))

    @property
    def events(self):
        return list(zip(self.event_positions.tolist(), self.event_jumps.tolist()))

    @property
    def grid(self):
        return list(zip(self.grid_positions.tolist(), self.grid_increments.tolist()))


def draw_jumps(rng, jumps, horizon):
    """Poisson(p horizon) events at sorted uniform positions with Exp(q) sizes."""
    if jumps is None:
        return np.zeros(0), np.zeros(0)
    n = rng.poisson(jumps.p * horizon)
    pos = np.sort(rng.uniform(0.0, horizon, n))
    size = rng.exponential(1.0 / jumps.q, n)
    return pos, size


def grid_steps(horizon, dx):
    """Number of uniform steps of length at most ``dx`` covering ``horizon``."""
    return max(1, int(math.ceil(horizon / dx - 1e-9)))


def sample_path(spec: LevySpec, horizon, dx, seed):
    if not horizon > 0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    if not dx > 0:
        raise ValueError(f"dx must be positive, got {dx}")
    rng = replica_rng(seed)
    pos, size = draw_jumps(rng, spec.jumps, horizon)
    rec = PathRecord(horizon=float(horizon), mu=spec.mu, event_positions=pos, event_jumps=size)
    if spec.sigma2 > 0:
        n = grid_steps(horizon, dx)
        h = horizon / n
        rec.grid_positions = h * np.arange(1, n + 1)
        rec.grid_increments = spec.sigma * math.sqrt(h) * rng.standard_normal(n)
    return rec
