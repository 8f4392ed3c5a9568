"""Closed-form stationary densities of the Riccati variable Z_inf (E = -k^2).

Two families have explicit solutions:

* ``example1`` -- no jumps (``W = a x + sigma B``):
  ``f(z) = C z^(-2a/sigma^2 - 1) exp(-(2/sigma^2)(k^2 z + 1/z))`` on ``(0, inf)``;
* ``example2`` -- ``sigma = 0`` and jumps ``p q exp(-q y) dy``:
  ``f(z) = C z^q (z - z_-)^(-nu-1) (z_+ - z)^(nu-1)`` on ``(0, z_+)``.

Everything is evaluated in log space; the constant ``C`` comes from adaptive
quadrature, with the closed forms (Bessel K, Beta times 2F1) kept as checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator

from . import specfun
from .levy import LevySpec

_QUAD = dict(epsabs=0.0, epsrel=1e-13, limit=400)


class DensityError(ValueError):
    pass


def _quad(f, a, b):
    val, _ = integrate.quad(f, a, b, **_QUAD)
    return val


@dataclass(frozen=True)
class StationaryDensity:
    family: str
    params: tuple
    support: tuple
    log_norm: float
    z_minus: float | None = None
    z_plus: float | None = None
    nu: float | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def log_kernel(self, z):
        """log of the formula without C."""
        sh = self._shape()
        return _log_kernel(self.family, self.params, sh, z) + sh["peak"]

    def _shape(self):
        if "shape" not in self._cache:
            self._cache["shape"] = _shape_constants(self.family, self.params)
        return self._cache["shape"]

    def logpdf(self, z):
        z = np.asarray(z, dtype=float)
        out = np.full(z.shape, -np.inf)
        lo, hi = self.support
        inside = (z > lo) & (z < hi)
        out[inside] = self.log_norm + self.log_kernel(z[inside])
        return float(out) if out.ndim == 0 else out

    def pdf(self, z):
        return np.exp(self.logpdf(z))

    def cdf(self, z):
        """P(Z_inf <= z); exact quadrature for up to 512 points, a cached table beyond."""
        z = np.asarray(z, dtype=float)
        if z.size <= 512:
            out = np.array([self._cdf_exact(v) for v in z.reshape(-1)]).reshape(z.shape)
        else:
            out = self._cdf_table(z)
        return float(out) if out.ndim == 0 else out

    def mean(self):
        if "mean" not in self._cache:
            self._cache["mean"] = _moment(self, 1)
        return self._cache["mean"]

    def _cdf_exact(self, z):
        lo, hi = self.support
        if z <= lo:
            return 0.0
        if z >= hi:
            return 1.0
        split = _split_point(self)
        c = math.exp(self.log_norm + self._shape()["peak"])
        if z <= split:
            return min(1.0, c * _mass(self, lo, z))
        return max(0.0, 1.0 - c * _mass(self, z, hi))

    def _cdf_table(self, z):
        if "table" not in self._cache:
            knots = _table_knots(self)
            vals = np.array([self._cdf_exact(v) for v in knots])
            vals = np.maximum.accumulate(vals)
            self._cache["table"] = (knots, PchipInterpolator(knots, vals, extrapolate=False))
        knots, interp = self._cache["table"]
        out = np.clip(np.nan_to_num(interp(np.clip(z, knots[0], knots[-1]))), 0.0, 1.0)
        out = np.where(z <= self.support[0], 0.0, out)
        return np.where(z >= self.support[1], 1.0, out)


def _shape_constants(family, params):
    """Location of the kernel maximum and the log value there (used as a shift)."""
    if family == "example1":
        a, sigma2, k = params
        alpha, beta = 2 * a / sigma2, 2 / sigma2
        mode = 2 * beta / ((alpha + 1) + math.sqrt((alpha + 1) ** 2 + 4 * beta * beta * k * k))
        peak = -(alpha + 1) * math.log(mode) - beta * (k * k * mode + 1 / mode)
        return {"alpha": alpha, "beta": beta, "mode": mode, "peak": peak}
    mu, p, q, k = params
    kappa = math.sqrt(4 * k * k + mu * mu)
    nu = p / kappa
    zp, zm = _roots(mu, k)
    zs = zp * np.linspace(1e-6, 1 - 1e-6, 2001)
    lk = q * np.log(zs) - (nu + 1) * np.log(zs - zm) + (nu - 1) * np.log(zp - zs)
    return {"nu": nu, "zp": zp, "zm": zm, "q": q, "peak": float(np.max(lk)), "mode": float(zs[np.argmax(lk)])}


def _log_kernel(family, params, sh, z):
    # log of the formula without C, minus its maximum
    z = np.asarray(z, dtype=float)
    if family == "example1":
        k = params[2]
        return -(sh["alpha"] + 1) * np.log(z) - sh["beta"] * (k * k * z + 1 / z) - sh["peak"]
    nu, zp, zm, q = sh["nu"], sh["zp"], sh["zm"], sh["q"]
    return q * np.log(z) - (nu + 1) * np.log(z - zm) + (nu - 1) * np.log(zp - z) - sh["peak"]


def _roots(mu, k):
    kappa = math.sqrt(4 * k * k + mu * mu)
    if mu >= 0:
        return 2 / (mu + kappa), -(mu + kappa) / (2 * k * k)
    return (kappa - mu) / (2 * k * k), -2 / (kappa - mu)


def _split_point(d):
    sh = d._shape()
    if d.family == "example1":
        return sh["mode"]
    return 0.5 * sh["zp"]


def _mass(d, lo, hi, power=0):
    """Integral of z^power * kernel over [lo, hi] with the endpoint substitutions."""
    sh = d._shape()
    fam, params = d.family, d.params

    def f(z):
        return z**power * math.exp(_log_kernel(fam, params, sh, z))

    if fam == "example1":
        mode = sh["mode"]
        total = 0.0
        if lo < mode:
            total += _quad(f, lo, min(hi, mode))
        if hi > mode:
            # u = 1/z on the right of the mode
            u_lo = 0.0 if math.isinf(hi) else 1.0 / hi
            u_hi = 1.0 / max(lo, mode)
            total += _quad(lambda u: f(1.0 / u) / (u * u) if u > 0 else 0.0, u_lo, u_hi)
        return total

    nu, zp, zm, q = sh["nu"], sh["zp"], sh["zm"], sh["q"]
    mid = 0.5 * zp
    total = 0.0
    if lo < mid:
        total += _quad(f, lo, min(hi, mid))
    if hi > mid:
        a = max(lo, mid)
        if nu < 1:
            # u = (z+ - z)^nu removes the integrable singularity at z+
            def g(u):
                z = zp - u ** (1.0 / nu)
                if z <= 0:
                    return 0.0
                return z**power * math.exp(
                    q * math.log(z) - (nu + 1) * math.log(z - zm) - sh["peak"]
                ) / nu

            total += _quad(g, (zp - min(hi, zp)) ** nu, (zp - a) ** nu)
        else:
            total += _quad(f, a, min(hi, zp))
    return total


def _moment(d, power):
    lo, hi = d.support
    return math.exp(d.log_norm + d._shape()["peak"]) * _mass(d, lo, hi, power)


def _table_knots(d):
    sh = d._shape()
    if d.family == "example1":
        m = sh["mode"]
        # cover the mass well beyond 1e-15 on both sides
        lo = m
        while d.log_norm + float(d.log_kernel(lo)) + math.log(lo) > -45 and lo > 1e-300:
            lo *= 0.7
        hi = m
        while d.log_norm + float(d.log_kernel(hi)) + math.log(hi) > -45:
            hi *= 1.4
        return np.geomspace(lo, hi, 4001)
    zp = sh["zp"]
    lin = zp * np.linspace(0.0, 1.0, 2001)[1:-1]
    edge = zp * np.logspace(-14, -0.5, 600)
    return np.unique(np.concatenate([[0.0], edge, lin, zp - edge, [zp]]))


def _validate_example1(a, sigma2, k):
    if not sigma2 > 0:
        raise DensityError(f"example1 needs sigma2 > 0, got {sigma2}")
    if k < 0:
        raise DensityError(f"k must be nonnegative, got {k}")
    if k == 0 and not a > 0:
        raise DensityError("example1 with k = 0 is normalisable only for a > 0")


def _validate_example2(mu, p, q, k):
    if not (p > 0 and q > 0):
        raise DensityError(f"example2 needs p, q > 0, got p={p}, q={q}")
    if not k > 0:
        raise DensityError(f"example2 needs k > 0, got {k}")
    if mu < 0:
        raise DensityError(f"example2 needs mu >= 0, got {mu}")


def normalize(family, params):
    """log C such that C * kernel integrates to one over the support."""
    if family == "example1":
        _validate_example1(*params)
        support = (0.0, math.inf)
    elif family == "example2":
        _validate_example2(*params)
        support = (0.0, _roots(params[0], params[3])[0])
    else:
        raise DensityError(f"unknown family {family!r}")
    probe = StationaryDensity(family, tuple(params), support, 0.0)
    total = _mass(probe, *support)
    if not (total > 0 and math.isfinite(total)):
        raise DensityError(f"non-integrable parameters for {family}: {params}")
    # _mass integrates the peak-shifted kernel
    return -math.log(total) - probe._shape()["peak"]


def _build(family, params):
    params = tuple(float(v) for v in params)
    log_norm = normalize(family, params)
    sh = _shape_constants(family, params)
    if family == "example1":
        return StationaryDensity(family, params, (0.0, math.inf), log_norm)
    zp, zm = sh["zp"], sh["zm"]
    return StationaryDensity(family, params, (0.0, zp), log_norm, z_minus=zm, z_plus=zp, nu=sh["nu"])


def example1(a, sigma2, k):
    return _build("example1", (a, sigma2, k))


def example2(mu, p, q, k):
    return _build("example2", (mu, p, q, k))


def for_spec(spec: LevySpec, k):
    """The closed-form stationary density for ``spec`` when one is known."""
    if spec.jumps is None and spec.sigma2 > 0:
        return example1(spec.a, spec.sigma2, k)
    if spec.jumps is not None and spec.sigma2 == 0:
        return example2(spec.mu, spec.jumps.p, spec.jumps.q, k)
    raise DensityError("no closed-form stationary density for this spec")


def example1_density(a, sigma2, k, z):
    if np.any(np.asarray(z) <= 0):
        raise DensityError("example1_density is defined for z > 0")
    return example1(a, sigma2, k).pdf(z)


def example2_density(mu, p, q, k, z):
    return example2(mu, p, q, k).pdf(z)


def density_mean(d: StationaryDensity):
    if d.family == "example1" and d.params[2] == 0 and not d.params[0] > d.params[1] / 2:
        raise DensityError("first moment diverges (k = 0 and 2a/sigma2 <= 1)")
    return d.mean()


def density_cdf(d: StationaryDensity, z):
    return d.cdf(z)


def example1_inverse_norm_closed_form(a, sigma2, k):
    """1/C = 2 k^alpha K_alpha(4k / sigma^2), alpha = 2a/sigma^2 (k > 0)."""
    alpha = 2 * a / sigma2
    beta = 2 / sigma2
    return 2 * k**alpha * specfun.bessel_k(alpha, 2 * beta * k)


def example1_mean_closed_form(a, sigma2, k):
    """E Z_inf = K_{alpha-1}(4k/sigma^2) / (k K_alpha(4k/sigma^2)) (k > 0)."""
    alpha = 2 * a / sigma2
    x = 4 * k / sigma2
    return specfun.bessel_k(alpha - 1, x) / (k * specfun.bessel_k(alpha, x))


def example2_inverse_norm_closed_form(mu, p, q, k):
    """1/C = z+^(q+nu) |z-|^(-nu-1) B(nu, q+1) 2F1(nu+1, q+1; q+nu+1; z+/z-)."""
    zp, zm = _roots(mu, k)
    nu = p / math.sqrt(4 * k * k + mu * mu)
    return (
        zp ** (q + nu) * abs(zm) ** (-nu - 1) * specfun.beta(nu, q + 1)
        * specfun.gauss_2f1(nu + 1, q + 1, q + nu + 1, zp / zm)
    )


def example2_mean_closed_form(mu, p, q, k):
    """Ratio of Euler integrals: same form as the normaliser with q -> q + 1."""
    return example2_inverse_norm_closed_form(mu, p, q + 1, k) / example2_inverse_norm_closed_form(mu, p, q, k)


def stationary_ode_residual(d: StationaryDensity, z, h=1e-6):
    """Residual of d/dz[(mu z - 1 + k^2 z^2) f] - p f - (q/z)(mu z - 1 + k^2 z^2) f."""
    if d.family != "example2":
        raise DensityError("the first-order equation applies to example2 only")
    mu, p, q, k = d.params
    z = np.asarray(z, dtype=float)

    def g(x):
        return (mu * x - 1 + k * k * x * x) * d.pdf(x)

    dg = (g(z + h) - g(z - h)) / (2 * h)
    return dg - p * d.pdf(z) - (q / z) * g(z)
