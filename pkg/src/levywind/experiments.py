"""Experiment definitions behind the command line.

Each runner takes a validated config dict and returns an :class:`ExperimentReport`
plus named tables (header, rows) that the CLI writes as CSV. Runners never
touch the filesystem, so tests can call them directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import densities, expfunc, moments, stats, winding
from .levy import LevySpec, c_function, is_subordinator


class ConfigError(ValueError):
    pass


@dataclass
class Table:
    header: list
    rows: list


_REQ = object()


def _num(v, name, lo=None, lo_open=False, integer=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{name}: expected a number, got {v!r}")
    if integer and int(v) != v:
        raise ConfigError(f"{name}: expected an integer, got {v!r}")
    if not math.isfinite(v):
        raise ConfigError(f"{name}: must be finite")
    if lo is not None and (v <= lo if lo_open else v < lo):
        raise ConfigError(f"{name}: must be {'>' if lo_open else '>='} {lo}, got {v}")
    return int(v) if integer else float(v)


def _pos(name):
    return lambda v: _num(v, name, 0, lo_open=True)


def _count(name, lo=1):
    return lambda v: _num(v, name, lo, integer=True)


def _pos_list(name):
    def check(v):
        if not isinstance(v, list) or not v:
            raise ConfigError(f"{name}: expected a nonempty list")
        return [_num(x, f"{name}[{i}]", 0, lo_open=True) for i, x in enumerate(v)]
    return check


def _int_list(name):
    def check(v):
        if not isinstance(v, list) or not v:
            raise ConfigError(f"{name}: expected a nonempty list")
        return [_num(x, f"{name}[{i}]", 1, integer=True) for i, x in enumerate(v)]
    return check


def _spec(v):
    try:
        return LevySpec.from_dict(v)
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"spec: {exc}") from None


def _opt(check):
    return lambda v: None if v is None else check(v)


def _choice(name, options):
    def check(v):
        if v not in options:
            raise ConfigError(f"{name}: expected one of {list(options)}, got {v!r}")
        return v
    return check


def _unit_list(v):
    if not isinstance(v, list) or not v:
        raise ConfigError("alphas: expected a nonempty list")
    out = []
    for i, a in enumerate(v):
        a = _num(a, f"alphas[{i}]", 0)
        if a > 1:
            raise ConfigError(f"alphas[{i}]: must lie in [0, 1]")
        out.append(a)
    return out


SCHEMAS = {
    "spitzer": {
        "t_values": (_pos_list("t_values"), [1e2, 1e4, 1e8]),
        "replicas": (_count("replicas", 2), 10_000),
        "r0": (_pos("r0"), 1.0),
        "eps": (_pos("eps"), winding.DEFAULT_EPS),
        "r_star": (_opt(_pos("r_star")), None),
        "skip_rel": (lambda v: _num(v, "skip_rel", 0), winding.DEFAULT_SKIP_REL),
        "skip_factor": (_pos("skip_factor"), winding.DEFAULT_SKIP_FACTOR),
        "hill_k_frac": (_pos("hill_k_frac"), 0.05),
    },
    "sectors": {
        "t": (_pos("t"), 1.0),
        "bridges": (_count("bridges", 2), 200),
        "n_steps": (_count("n_steps", 3), 2**14),
        "resolution": (_count("resolution", 8), 512),
        "refinements": (_count("refinements", 0), 1),
        "n_max": (_count("n_max"), 5),
        "exclude_boundary": (lambda v: bool(v), False),
        "exact": (lambda v: bool(v), False),
        "zero_links": (_choice("zero_links", winding.ZERO_LINKS), "cut"),
    },
    "dufresne": {
        "mu": (_pos("mu"), 1.0),
        "replicas": (_count("replicas", 2), 100_000),
        "horizon": (_opt(_pos("horizon")), 40.0),
        "dx": (_pos("dx"), expfunc.DEFAULT_DX),
    },
    "riccati-density": {
        "spec": (_spec, _REQ),
        "k": (_pos("k"), 1.0),
        "replicas": (_count("replicas", 2), 100_000),
        "burn_in": (_opt(_pos("burn_in")), None),
        "dx": (_pos("dx"), expfunc.DEFAULT_DX),
        "bins": (_count("bins", 2), 200),
    },
    "lyapunov-curve": {
        "spec": (_spec, _REQ),
        "k_values": (_pos_list("k_values"), [0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0]),
        "replicas": (_count("replicas", 2), 100_000),
        "burn_in": (_opt(_pos("burn_in")), None),
        "dx": (_pos("dx"), expfunc.DEFAULT_DX),
        "tol": (_pos("tol"), 1e-10),
        "max_depth": (_count("max_depth", 32), 1 << 22),
        "start": (_choice("start", moments.START_VALUES), "fixed_point"),
    },
    "moments-check": {
        "spec": (_spec, _REQ),
        "lambda": (_pos("lambda"), 1.0),
        "s_max": (_count("s_max"), 4),
        "replicas": (_count("replicas", 2), 100_000),
        "k": (_opt(lambda v: _num(v, "k", 0)), None),
    },
    "deficit": {
        "alphas": (_unit_list, [0.25, 0.5, 0.75]),
        "n_max_values": (_int_list("n_max_values"), [10, 100, 1000, 10_000, 100_000, 1_000_000]),
    },
}

EXPERIMENTS = tuple(SCHEMAS)


def validate(experiment, raw):
    """Fill defaults and check types; returns (params, echo) where echo is JSON-safe."""
    if experiment not in SCHEMAS:
        raise ConfigError(f"unknown experiment {experiment!r}; choose from {list(EXPERIMENTS)}")
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    raw = dict(raw)
    named = raw.pop("experiment", experiment)
    if named != experiment:
        raise ConfigError(f"config is for {named!r}, not {experiment!r}")
    seed = raw.pop("base_seed", 0)
    seed = _num(seed, "base_seed", 0, integer=True)
    schema = SCHEMAS[experiment]
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(f"unknown config keys for {experiment}: {unknown}")
    params = {}
    echo = {"experiment": experiment, "base_seed": seed}
    for key, (check, default) in schema.items():
        if key in raw:
            params[key] = check(raw[key])
            echo[key] = raw[key]
        elif default is _REQ:
            raise ConfigError(f"missing required key {key!r}")
        else:
            params[key] = default
            echo[key] = default
    params["base_seed"] = seed
    _semantic_checks(experiment, params)
    return params, echo


def _semantic_checks(experiment, p):
    if experiment == "lyapunov-curve" and not is_subordinator(p["spec"]):
        raise ConfigError("lyapunov-curve needs a subordinator spec (sigma2 = 0, mu >= 0)")
    if experiment == "moments-check" and not is_subordinator(p["spec"]):
        raise ConfigError("moments-check needs a subordinator spec (sigma2 = 0, mu >= 0)")
    if experiment == "riccati-density":
        try:
            densities.for_spec(p["spec"], p["k"])
        except densities.DensityError as exc:
            raise ConfigError(f"riccati-density: {exc}") from None
    if experiment == "dufresne" and p["horizon"] is None:
        p["horizon"] = expfunc.default_dufresne_horizon(p["mu"])


# runners


def run_spitzer(p, threads=1):
    rep = stats.ExperimentReport(seeds=[p["base_seed"]])
    per = Table(["t", "replica", "theta", "theta_big", "theta_small", "steps", "skips"], [])
    summ = Table(["t", "ks_cauchy", "median_abs", "hill_index", "m4_big", "m4_full"], [])
    r_star = p["r_star"] if p["r_star"] is not None else p["r0"]
    for j, t in enumerate(p["t_values"]):
        big, small, steps, skips = winding.winding_batch(
            t, p["replicas"], p["base_seed"] + j, r0=p["r0"], eps=p["eps"], r_star=r_star,
            threads=threads, skip_rel=p["skip_rel"], skip_factor=p["skip_factor"],
        )
        theta = big + small
        x = winding.spitzer_statistic(theta, t)
        xb = winding.spitzer_statistic(big, t)
        ks = stats.ks_statistic(x, stats.cauchy_cdf)
        med = float(np.median(np.abs(x)))
        hill = stats.hill_tail_index(x, p["hill_k_frac"])
        m4b = stats.sample_moment(xb, 4)
        m4 = stats.sample_moment(x, 4)
        tag = f"t={t:g}"
        rep.add_gof(f"ks_cauchy[{tag}]", ks)
        rep.add_gof(f"hill_index[{tag}]", hill)
        rep.add_estimate(f"median_abs[{tag}]", med, _median_se(np.abs(x)), x.size)
        rep.add_samples(f"statistic_mean[{tag}]", x)
        rep.add_samples(f"big_fourth_moment[{tag}]", xb**4)
        rep.add_estimate(f"full_fourth_moment[{tag}]", m4, float("nan"), x.size)
        rep.add_samples(f"steps[{tag}]", steps)
        summ.rows.append([t, ks, med, hill, m4b, m4])
        for i in range(theta.size):
            per.rows.append([t, i, theta[i], big[i], small[i], int(steps[i]), int(skips[i])])
    rep.seeds = [p["base_seed"] + j for j in range(len(p["t_values"]))]
    return rep, {"spitzer_summary.csv": summ, "spitzer_replicas.csv": per}


def _median_se(x):
    """Order-statistic interval half-width for the median, scaled to one SE."""
    x = np.sort(np.asarray(x))
    n = x.size
    d = math.sqrt(n) / 2
    lo = int(max(0, math.floor(n / 2 - d)))
    hi = int(min(n - 1, math.ceil(n / 2 + d)))
    return float((x[hi] - x[lo]) / 2)


def _sector_row(f, n_max):
    return [f.sector_areas.get(n, 0.0) for n in range(-n_max, n_max + 1) if n != 0] + [
        f.algebraic_area, f.arithmetic_area, f.zero_sector_inside,
    ]


def run_sectors(p, threads=1):
    t, n_max = p["t"], p["n_max"]
    levels = p["refinements"]
    base, res0 = p["n_steps"], p["resolution"]
    rep = stats.ExperimentReport(seeds=[p["base_seed"]])
    cols = [f"A_{n}" for n in range(-n_max, n_max + 1) if n != 0] + [
        "algebraic_area", "arithmetic_area", "A0_inside",
    ]
    header = ["bridge", "n_steps", "resolution", "method"] + cols + ["shoelace_area", "boundary_area"]
    per = Table(header, [])
    rows = [None] * p["bridges"]

    def work(a, b):
        for i in range(a, b):
            hier = winding.bridge_hierarchy(t, base, levels, (p["base_seed"], i))
            out = []
            for lev, poly in enumerate(hier):
                res = res0 * 2**lev
                f = winding.winding_field(poly, resolution=res, exclude_boundary=p["exclude_boundary"],
                                          zero_links=p["zero_links"])
                out.append((lev, "grid", _sector_row(f, n_max), winding.shoelace_area(poly), f.boundary_area))
                if p["exact"]:
                    e = winding.polygon_sectors(poly)
                    out.append((lev, "exact", _sector_row(e, n_max), winding.shoelace_area(poly), 0.0))
            rows[i] = out
        return np.zeros(0)

    from .parallel import map_blocks

    map_blocks(work, p["bridges"], block=max(1, min(8, p["bridges"])), threads=threads)
    targets = {"A_1": 1 / (2 * math.pi), "arithmetic_area": math.pi / 5, "A0_inside": math.pi / 30}
    summ = Table(["n_steps", "resolution", "method", "quantity", "mean_over_t", "se_over_t", "target", "rel_bias"], [])
    methods = ["grid", "exact"] if p["exact"] else ["grid"]
    for lev in range(levels + 1):
        for method in methods:
            data = np.array([r[2] for rr in rows for r in rr if r[0] == lev and r[1] == method]) / t
            tag = f"n_steps={base * 2**lev},res={res0 * 2**lev},{method}"
            for c, name in enumerate(cols):
                rep.add_samples(f"{name}[{tag}]", data[:, c])
            a1 = 0.5 * (data[:, cols.index("A_1")] + data[:, cols.index("A_-1")])
            series = {"A_1": a1, "arithmetic_area": data[:, cols.index("arithmetic_area")],
                      "A0_inside": data[:, cols.index("A0_inside")],
                      "algebraic_area": data[:, cols.index("algebraic_area")]}
            rep.add_samples(f"A_pm1_avg[{tag}]", a1)
            for q, tgt in list(targets.items()) + [("algebraic_area", 0.0)]:
                m, se = stats.mean_with_se(series[q])
                bias = (m / tgt - 1) if tgt else m
                summ.rows.append([base * 2**lev, res0 * 2**lev, method, q, m, se, tgt, bias])
    for i, rr in enumerate(rows):
        for lev, method, vals, sh, bnd in rr:
            per.rows.append([i, base * 2**lev, res0 * 2**lev, method] + vals + [sh, bnd])
    rep.extra["targets_over_t"] = targets
    return rep, {"sectors_summary.csv": summ, "sectors_bridges.csv": per}


def run_dufresne(p, threads=1):
    mu = p["mu"]
    x = expfunc.dufresne_batch(mu, p["replicas"], p["base_seed"], horizon=p["horizon"], dx=p["dx"],
                               threads=threads)
    rep = stats.ExperimentReport(seeds=[p["base_seed"]])
    rep.add_samples("mean", x)
    rep.add_gof("ks_vs_2_over_gamma", stats.ks_statistic(x, lambda z: stats.gamma_reciprocal_cdf(mu, z)))
    c1 = mu - 0.5
    rep.extra["recursion_mean"] = (1.0 / c1) if c1 > 0 else None
    tab = Table(["replica", "value"], [[i, float(v)] for i, v in enumerate(x)])
    return rep, {"dufresne_samples.csv": tab}


def stationary_samples(spec, k, n, base_seed, burn_in=None, dx=expfunc.DEFAULT_DX, threads=1):
    return expfunc.stationary_riccati_batch(spec, k, n, base_seed, burn_in=burn_in, dx=dx,
                                            threads=threads)


def run_riccati_density(p, threads=1):
    spec, k = p["spec"], p["k"]
    d = densities.for_spec(spec, k)
    z = stationary_samples(spec, k, p["replicas"], p["base_seed"], p["burn_in"], p["dx"], threads)
    rep = stats.ExperimentReport(seeds=[p["base_seed"]])
    rep.add_samples("mc_mean", z)
    rep.extra["density_mean"] = d.mean()
    rep.extra["family"] = d.family
    if d.family == "example2":
        lo, hi = 0.0, d.z_plus
        rep.extra["fraction_in_support"] = float(np.mean((z > 0) & (z < d.z_plus)))
        rep.extra["fraction_at_most_z_plus"] = float(np.mean((z > 0) & (z <= d.z_plus)))
        rep.extra["log_norm_quadrature"] = d.log_norm
        rep.extra["log_norm_closed_form"] = -math.log(
            densities.example2_inverse_norm_closed_form(*d.params))
    else:
        lo, hi = 0.0, float(np.quantile(z, 0.999))
        rep.extra["log_norm_quadrature"] = d.log_norm
        rep.extra["log_norm_closed_form"] = -math.log(densities.example1_inverse_norm_closed_form(*d.params))
    counts, edges = np.histogram(z, bins=p["bins"], range=(lo, hi))
    rep.add_gof("l1_histogram", stats.l1_density_distance((counts, edges, z.size), d))
    rep.add_gof("ks", stats.ks_statistic(z, d.cdf))
    model = np.diff(d.cdf(edges))
    hist = Table(["bin_left", "bin_right", "count", "empirical_mass", "model_mass"],
                 [[edges[i], edges[i + 1], int(counts[i]), counts[i] / z.size, model[i]]
                  for i in range(counts.size)])
    zz = np.linspace(lo, hi, 401)[1:-1]
    dens = Table(["z", "pdf", "cdf"], [[a, b, c] for a, b, c in zip(zz, d.pdf(zz), d.cdf(zz))])
    return rep, {"riccati_histogram.csv": hist, "riccati_density.csv": dens}


def quadrature_omega(spec, k):
    """Omega(-k^2) with E(Z_inf) from the closed-form density, or z+ for pure drift."""
    if spec.jumps is None and spec.sigma2 == 0:
        return moments.omega_from_mean(spec, k, expfunc.fixed_point(k, spec.mu), method="quadrature")
    d = densities.for_spec(spec, k)
    return moments.omega_from_mean(spec, k, d.mean(), method="quadrature")


def monte_carlo_omega(spec, k, n, base_seed, burn_in=None, dx=expfunc.DEFAULT_DX, threads=1):
    z = stationary_samples(spec, k, n, base_seed, burn_in, dx, threads)
    m, se = stats.mean_with_se(z)
    return moments.omega_from_mean(spec, k, m, method="monte_carlo", se=se)


def run_lyapunov_curve(p, threads=1):
    spec = p["spec"]
    rep = stats.ExperimentReport()
    tab = Table(["E", "omega_cf", "omega_quadrature", "omega_mc", "mc_se"], [])
    for j, k in enumerate(p["k_values"]):
        seed = p["base_seed"] + j
        rep.seeds.append(seed)
        cf = moments.continued_fraction_omega(spec, k, tol=p["tol"], max_depth=p["max_depth"],
                                             start=p["start"])
        try:
            qd = quadrature_omega(spec, k).omega
        except densities.DensityError:
            qd = float("nan")
        mc = monte_carlo_omega(spec, k, p["replicas"], seed, p["burn_in"], p["dx"], threads)
        tag = f"k={k:g}"
        rep.add_estimate(f"omega_mc[{tag}]", mc.omega, mc.se, p["replicas"])
        rep.add_estimate(f"omega_cf[{tag}]", cf.omega, 0.0, 1)
        rep.add_gof(f"cf_minus_quadrature[{tag}]", cf.omega - qd)
        rep.add_gof(f"cf_minus_mc_in_se[{tag}]", (cf.omega - mc.omega) / mc.se if mc.se > 0 else 0.0)
        tab.rows.append([-k * k, cf.omega, qd, mc.omega, mc.se])
    return rep, {"lyapunov_curve.csv": tab}


def bertoin_yor_samples(spec, lam, n, base_seed, threads=1):
    return expfunc.exp_functional_batch(spec, 0.0, n, base_seed, exp_rate=lam, threads=threads)


def run_moments_check(p, threads=1):
    spec, lam = p["spec"], p["lambda"]
    rep = stats.ExperimentReport(seeds=[p["base_seed"]])
    x = bertoin_yor_samples(spec, lam, p["replicas"], p["base_seed"], threads)
    tab = Table(["s", "recursion", "mc", "mc_se", "z_score"], [])
    for s in range(1, p["s_max"] + 1):
        exact = moments.bertoin_yor_moment(spec, lam, s)
        m, se = stats.mean_with_se(x**s)
        rep.add_estimate(f"moment[s={s}]", m, se, x.size)
        tab.rows.append([s, exact, m, se, (m - exact) / se])
    tables = {"bertoin_yor_moments.csv": tab}
    if p["k"] is not None:
        mt = moments.stationary_moment_ratios(spec, p["k"], p["s_max"])
        st = Table(["s", "recursion"], [[int(s), float(v)] for s, v in zip(mt.s_values, mt.values)])
        if p["k"] > 0 and spec.jumps is not None:
            d = densities.for_spec(spec, p["k"])
            rep.extra["density_mean"] = d.mean()
        tables["stationary_moments.csv"] = st
        rep.extra["stationary_first_moment"] = float(mt.values[1])
    rep.extra["c_values"] = [c_function(spec, float(s)) for s in range(p["s_max"] + 1)]
    return rep, tables


def run_deficit(p, threads=1):
    rep = stats.ExperimentReport()
    tab = Table(["alpha", "n_max", "partial_sum", "limit", "error"], [])
    for a in p["alphas"]:
        lim = winding.partition_deficit_limit(a)
        for n in p["n_max_values"]:
            v = winding.partition_deficit(a, n)
            tab.rows.append([a, n, v, lim, v - lim])
        rep.add_gof(f"abs_error[alpha={a:g},n_max={p['n_max_values'][-1]}]", abs(tab.rows[-1][-1]))
    return rep, {"deficit.csv": tab}


RUNNERS = {
    "spitzer": run_spitzer,
    "sectors": run_sectors,
    "dufresne": run_dufresne,
    "riccati-density": run_riccati_density,
    "lyapunov-curve": run_lyapunov_curve,
    "moments-check": run_moments_check,
    "deficit": run_deficit,
}


def run(experiment, raw_config, threads=1, seed=None):
    """Validate and run; returns (report, tables)."""
    raw = dict(raw_config)
    if seed is not None:
        raw["base_seed"] = seed
    params, echo = validate(experiment, raw)
    rep, tables = RUNNERS[experiment](params, threads=threads)
    rep.config_echo = echo
    return rep, tables
