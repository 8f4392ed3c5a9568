"""Random streams, reference laws, goodness-of-fit statistics and reports."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import specfun


def replica_rng(seed, index=None):
    """Generator for one replica.

    ``seed`` may be an int or an ``(base_seed, index)`` pair. Replica ``i`` of
    base seed ``s`` always gets the stream keyed by ``[s, i]``, so serial and
    parallel runs draw identical numbers.
    """
    if index is not None:
        return np.random.default_rng([int(seed), int(index)])
    if isinstance(seed, (tuple, list)):
        return np.random.default_rng([int(v) for v in seed])
    return np.random.default_rng(int(seed))


@dataclass(frozen=True)
class Estimate:
    value: float
    se: float
    n: int


@dataclass
class ExperimentReport:
    """Estimates with standard errors plus GOF statistics; entries never change once added."""

    estimates: dict[str, Estimate] = field(default_factory=dict)
    gof: dict[str, float] = field(default_factory=dict)
    seeds: list[int] = field(default_factory=list)
    config_echo: Any = None
    extra: dict[str, Any] = field(default_factory=dict)

    def add_estimate(self, name, value, se, n):
        if name in self.estimates:
            raise KeyError(f"estimate {name!r} already recorded")
        self.estimates[name] = Estimate(float(value), float(se), int(n))

    def add_samples(self, name, samples):
        m, se = mean_with_se(samples)
        self.add_estimate(name, m, se, len(samples))

    def add_gof(self, name, value):
        if name in self.gof:
            raise KeyError(f"statistic {name!r} already recorded")
        self.gof[name] = float(value)

    def to_dict(self):
        return {
            "estimates": {
                k: {"value": e.value, "se": e.se, "n_samples": e.n}
                for k, e in self.estimates.items()
            },
            "gof": dict(self.gof),
            "seeds": list(self.seeds),
            "config": self.config_echo,
            **self.extra,
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def mean_with_se(samples):
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValueError("mean_with_se: empty sample")
    if x.size == 1:
        return float(x[0]), 0.0
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def ks_statistic(samples, cdf: Callable):
    """Kolmogorov distance sup |F_N - F| between a sample and a reference CDF."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n == 0:
        raise ValueError("ks_statistic: empty sample")
    f = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def ks_two_sample(a, b):
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise ValueError("ks_two_sample: empty sample")
    pts = np.concatenate([a, b])
    fa = np.searchsorted(a, pts, side="right") / a.size
    fb = np.searchsorted(b, pts, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def sample_gamma(shape, seed, size=None):
    """Unit-scale gamma variates (numpy's Marsaglia-Tsang sampler with shape boost)."""
    if shape <= 0:
        raise ValueError(f"gamma shape must be positive, got {shape}")
    rng = seed if isinstance(seed, np.random.Generator) else replica_rng(seed)
    return rng.standard_gamma(shape, size=size)


def cauchy_cdf(x):
    return 0.5 + np.arctan(x) / math.pi


def gamma_reciprocal_cdf(mu, x):
    """P(2 / Gamma_{2 mu} <= x) = Q(2 mu, 2 / x)."""
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise ValueError("gamma_reciprocal_cdf needs x >= 0")
    out = np.zeros_like(xa)
    pos = xa > 0
    out[pos] = specfun.reg_inc_gamma_upper(2.0 * mu, 2.0 / xa[pos])
    return float(out) if out.ndim == 0 else out


def l1_density_distance(histogram, density):
    """Sum over bins of |empirical mass - model mass|, plus the mass outside the bins.

    ``histogram`` is ``(counts, edges)`` as from :func:`numpy.histogram` and
    ``n_total`` samples are taken as ``counts.sum()`` unless the counts come
    with a third element giving the total (samples outside the bins). ``density``
    is anything with a vectorised ``cdf`` method or a CDF callable.
    """
    if len(histogram) == 3:
        counts, edges, n_total = histogram
    else:
        counts, edges = histogram
        n_total = np.sum(counts)
    counts = np.asarray(counts, dtype=float)
    edges = np.asarray(edges, dtype=float)
    if n_total <= 0:
        raise ValueError("l1_density_distance: empty histogram")
    cdf = density.cdf if hasattr(density, "cdf") else density
    fe = np.asarray(cdf(edges), dtype=float)
    model = np.diff(fe)
    emp = counts / n_total
    outside_emp = 1.0 - emp.sum()
    outside_model = 1.0 - (fe[-1] - fe[0])
    return float(np.abs(emp - model).sum() + abs(outside_emp - outside_model))


def hill_tail_index(samples, k_frac):
    """Hill estimate of the tail index from the top ``k_frac`` share of |samples|."""
    if not 0 < k_frac < 0.5:
        raise ValueError(f"k_frac must lie in (0, 0.5), got {k_frac}")
    x = np.sort(np.abs(np.asarray(samples, dtype=float)))[::-1]
    if x.size == 0:
        raise ValueError("hill_tail_index: empty sample")
    k = int(k_frac * x.size)
    if k < 2:
        raise ValueError("hill_tail_index: too few samples for k_frac")
    h = np.mean(np.log(x[:k])) - math.log(x[k])
    return float(1.0 / h)


def sample_moment(samples, order):
    x = np.asarray(samples, dtype=float)
    return float(np.mean(x**order))
