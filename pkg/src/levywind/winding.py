"""Winding of planar Brownian motion around the origin and sector areas of bridges.

The angle is accumulated from Cartesian Gaussian steps of size ``eps |Z|^2``,
so each step turns the path by a small, radius-independent amount. Deep
excursions toward the origin are handled by the skew-product shortcut: in the
clock ``H = int ds / |Z|^2`` the log-radius and the angle are independent
Brownian motions, so the exit of the disc of radius ``b`` from radius ``r``
happens at clock ``T = log(b/r)^2 / N1^2`` with angle change ``sqrt(T) N2``.
The shortcut is exact for the angle; its real-time cost is replaced by the
mean exit time ``(b^2 - r^2)/2``, and ``b^2 <= skip_rel * (t - tau)`` keeps
that substitution a small fraction of the remaining time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from . import kernels
from .parallel import map_blocks
from .stats import ExperimentReport, replica_rng

DEFAULT_EPS = 1e-3
DEFAULT_SKIP_REL = 1e-2
DEFAULT_SKIP_FACTOR = 0.25
BUFFER_WIDTH = 2048


@dataclass(frozen=True)
class WindingTrace:
    total_angle: float
    big_angle: float
    small_angle: float
    horizon: float
    start_radius: float
    steps: int
    skips: int = 0
    increments: np.ndarray | None = field(default=None, repr=False, compare=False)


def _check_walk_args(t, r0, eps, r_star):
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    if not r0 > 0:
        raise ValueError(f"r0 must be positive (the angle is undefined at the origin), got {r0}")
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if not r_star > 0:
        raise ValueError(f"r_star must be positive, got {r_star}")


def sample_winding_angle(t, r0=1.0, eps=DEFAULT_EPS, seed=0, r_star=None, record=False,
                         skip_rel=DEFAULT_SKIP_REL, skip_factor=DEFAULT_SKIP_FACTOR):
    """Winding angle of a planar Brownian path from (r0, 0) up to time ``t``.

    This is the scalar reference loop. It consumes the stream in the same
    order as the batched kernel, so ``seed=(base, i)`` reproduces replica ``i``
    of :func:`winding_batch`. With ``record=True`` the trace carries an
    ``(n, 2)`` array of (angle increment, midpoint radius) per action.
    """
    r_star = r0 if r_star is None else r_star
    _check_walk_args(t, r0, eps, r_star)
    rng = replica_rng(seed)
    rstar2 = r_star * r_star
    x, y, tau = float(r0), 0.0, 0.0
    thp = thm = 0.0
    steps = skips = 0
    rec = [] if record else None
    while True:
        n1, n2 = rng.standard_normal(2)
        r2 = x * x + y * y
        rem = t - tau
        b2 = min(rstar2, skip_rel * rem) if skip_rel > 0 else 0.0
        if skip_rel > 0 and r2 < b2 * skip_factor:
            lr = 0.5 * math.log(b2 / r2)
            hit = lr * lr / max(n1 * n1, 1e-300)
            dth = math.sqrt(hit) * n2
            ang = math.atan2(y, x) + dth
            rad = math.sqrt(b2)
            tau = tau + 0.5 * (b2 - r2)
            x, y = rad * math.cos(ang), rad * math.sin(ang)
            thm += dth
            skips += 1
            if rec is not None:
                rec.append((dth, math.sqrt(r2)))
            continue
        dt = eps * r2
        last = dt >= rem
        if last:
            dt = rem
        sq = math.sqrt(dt)
        nx, ny = x + sq * n1, y + sq * n2
        dth = math.atan2(x * ny - y * nx, x * nx + y * ny)
        mx, my = 0.5 * (x + nx), 0.5 * (y + ny)
        if mx * mx + my * my < rstar2:
            thm += dth
        else:
            thp += dth
        if rec is not None:
            rec.append((dth, math.hypot(mx, my)))
        x, y = nx, ny
        steps += 1
        if last:
            break
        tau += dt
    inc = np.array(rec, dtype=float).reshape(-1, 2) if record else None
    return WindingTrace(
        total_angle=thp + thm, big_angle=thp, small_angle=thm, horizon=float(t),
        start_radius=float(r0), steps=steps, skips=skips, increments=inc,
    )


def _walk_block(t, r0, eps, r_star, skip_rel, skip_factor, base_seed, start, stop):
    rngs = [replica_rng(base_seed, i) for i in range(start, stop)]
    m = stop - start
    state = np.zeros((m, 8))
    state[:, 0] = r0
    buf = np.zeros((m, BUFFER_WIDTH))
    while True:
        act = np.nonzero(state[:, 7] == 0.0)[0]
        if act.size == 0:
            break
        for i in act:
            buf[i] = rngs[i].standard_normal(BUFFER_WIDTH)
        kernels.winding_walk(state, buf, float(t), float(eps), float(r_star * r_star),
                             float(skip_rel), float(skip_factor))
    return state[:, 3].copy(), state[:, 4].copy(), state[:, 5].copy(), state[:, 6].copy()


def winding_batch(t, n, base_seed, r0=1.0, eps=DEFAULT_EPS, r_star=None, threads=1,
                  skip_rel=DEFAULT_SKIP_REL, skip_factor=DEFAULT_SKIP_FACTOR, block=256):
    """(big, small, steps, skips) arrays for ``n`` independent replicas."""
    r_star = r0 if r_star is None else r_star
    _check_walk_args(t, r0, eps, r_star)
    fn = lambda a, b: _walk_block(t, r0, eps, r_star, skip_rel, skip_factor, base_seed, a, b)
    return map_blocks(fn, n, block, threads)


def split_windings(increments, r_star):
    """Partition angle increments into (big, small) by midpoint radius vs ``r_star``.

    ``increments`` is an ``(n, 2)`` array of (angle increment, midpoint radius),
    as recorded by :func:`sample_winding_angle`.
    """
    if not r_star > 0:
        raise ValueError(f"r_star must be positive, got {r_star}")
    inc = np.asarray(increments, dtype=float).reshape(-1, 2)
    inner = inc[:, 1] < r_star
    return float(np.sum(inc[~inner, 0])), float(np.sum(inc[inner, 0]))


def spitzer_statistic(angles, t):
    return 2.0 * np.asarray(angles, dtype=float) / math.log(t)


# bridges and winding sectors


def _bridge_from(rng, t, n_steps):
    inc = math.sqrt(t / n_steps) * rng.standard_normal((n_steps, 2))
    path = np.vstack([np.zeros((1, 2)), np.cumsum(inc, axis=0)])
    s = np.linspace(0.0, 1.0, n_steps + 1)[:, None]
    bridge = path - s * path[-1]
    bridge[-1] = bridge[0]
    return bridge


def sample_bridge(t, n_steps, seed):
    """Planar Brownian bridge on [0, t] at ``n_steps + 1`` uniform times, closed.

    Returned as an ``(n_steps + 1, 2)`` array whose last row equals the first.
    """
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    if n_steps < 3:
        raise ValueError(f"n_steps must be at least 3, got {n_steps}")
    return _bridge_from(replica_rng(seed), t, n_steps)


def refine_bridge(bridge, t, rng):
    """Insert the midpoint of every step, drawn from its conditional law.

    Given its neighbours a time ``dt`` apart, a midpoint is Gaussian with mean
    their average and variance ``dt / 4`` per coordinate, so the result is an
    exact bridge sample on the doubled grid that refines ``bridge``.
    """
    b = np.asarray(bridge, dtype=float)
    m = b.shape[0] - 1
    dt = t / m
    mid = 0.5 * (b[:-1] + b[1:]) + math.sqrt(dt / 4) * rng.standard_normal((m, 2))
    out = np.empty((2 * m + 1, 2))
    out[0::2] = b
    out[1::2] = mid
    return out


def bridge_hierarchy(t, n_steps, levels, seed):
    """Nested bridges with ``n_steps * 2**j`` steps, j = 0..levels, on one stream.

    Level 0 equals :func:`sample_bridge` for the same seed; each further level
    refines the previous one, so level-to-level differences are paired.
    """
    if levels < 0:
        raise ValueError(f"levels must be nonnegative, got {levels}")
    rng = replica_rng(seed)
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    if n_steps < 3:
        raise ValueError(f"n_steps must be at least 3, got {n_steps}")
    out = [_bridge_from(rng, t, n_steps)]
    for _ in range(levels):
        out.append(refine_bridge(out[-1], t, rng))
    return out


@dataclass(frozen=True)
class WindingField:
    grid: np.ndarray
    cell_area: float
    sector_areas: dict
    algebraic_area: float
    arithmetic_area: float
    zero_sector_inside: float
    box: tuple
    boundary: np.ndarray | None = field(default=None, repr=False, compare=False)
    boundary_area: float = 0.0


def default_box(polygon, resolution, margin_cells=2):
    """Smallest square around the polygon with ``margin_cells`` free cells per side."""
    p = np.asarray(polygon, dtype=float)
    lo = p.min(axis=0)
    hi = p.max(axis=0)
    span = float(max(hi - lo))
    if resolution <= 2 * margin_cells:
        raise ValueError("resolution too small for the requested margin")
    side = span * resolution / (resolution - 2 * margin_cells) if span > 0 else 1.0
    x0, y0 = 0.5 * (lo + hi) - side / 2
    return float(x0), float(y0), float(side)


def _zero_components_inside(grid, cut_h, cut_v):
    """Mask of index-0 cells not linked to the box edge through uncut 0-0 links."""
    n = grid.shape[0]
    zero = grid == 0
    idx = np.arange(n * n).reshape(n, n)
    hl = zero[:, :-1] & zero[:, 1:] & (cut_h == 0)
    vl = zero[:-1, :] & zero[1:, :] & (cut_v == 0)
    outside = n * n
    edge = np.zeros((n, n), dtype=bool)
    edge[0, :] = edge[-1, :] = edge[:, 0] = edge[:, -1] = True
    el = edge & zero
    rows = np.concatenate([idx[:, :-1][hl], idx[:-1, :][vl], idx[el]])
    cols = np.concatenate([idx[:, 1:][hl], idx[1:, :][vl], np.full(int(el.sum()), outside)])
    g = coo_matrix((np.ones(rows.size, dtype=np.int8), (rows, cols)), shape=(n * n + 1, n * n + 1))
    _, labels = connected_components(g, directed=False)
    inside = zero & (labels[:-1].reshape(n, n) != labels[outside])
    return inside


ZERO_LINKS = ("cut", "open")


def winding_field(polygon, box=None, resolution=512, exclude_boundary=False, zero_links="cut"):
    """Winding index at every cell centre of a ``resolution``-square grid on ``box``.

    ``box`` is ``(x0, y0, side)``; by default the tight square from
    :func:`default_box`. The index is exact for the polygon (signed crossings
    of the ray to the right). Cells within one cell diagonal of the curve are
    flagged in ``boundary``; they are dropped from the areas only when
    ``exclude_boundary`` is set. Index-0 cells count toward
    ``zero_sector_inside`` when no chain of links joins them to the box edge;
    with ``zero_links="cut"`` a link the polygon crosses is not a path, with
    ``"open"`` every 4-neighbour link between index-0 cells is.
    """
    if zero_links not in ZERO_LINKS:
        raise ValueError(f"zero_links must be one of {ZERO_LINKS}, got {zero_links!r}")
    p = np.asarray(polygon, dtype=float)
    if p.ndim != 2 or p.shape[1] != 2 or p.shape[0] < 4:
        raise ValueError("polygon must be an (m, 2) array with m >= 4")
    if not np.array_equal(p[0], p[-1]):
        raise ValueError("polygon must be closed (first point repeated last)")
    if resolution < 2:
        raise ValueError(f"resolution must be at least 2, got {resolution}")
    if box is None:
        box = default_box(p, resolution)
    x0, y0, side = (float(v) for v in box)
    if not side > 0:
        raise ValueError(f"box side must be positive, got {side}")
    lo, hi = p.min(axis=0), p.max(axis=0)
    if lo[0] < x0 or lo[1] < y0 or hi[0] > x0 + side or hi[1] > y0 + side:
        raise ValueError("box must contain the polygon's bounding box")
    n = int(resolution)
    h = side / n
    xs = np.ascontiguousarray(p[:, 0])
    ys = np.ascontiguousarray(p[:, 1])
    grid, cut_h, cut_v = kernels.winding_raster(xs, ys, x0, y0, h, n)
    grid = np.asarray(grid)
    bmask = np.asarray(kernels.boundary_mask(xs, ys, x0, y0, h, n, math.sqrt(2.0) * h)).astype(bool)
    cut_h, cut_v = np.asarray(cut_h), np.asarray(cut_v)
    if zero_links == "open":
        cut_h, cut_v = np.zeros_like(cut_h), np.zeros_like(cut_v)
    inside0 = _zero_components_inside(grid, cut_h, cut_v)
    use = ~bmask if exclude_boundary else np.ones_like(bmask)
    cell = h * h
    vals, counts = np.unique(grid[use], return_counts=True)
    sectors = {int(v): float(c) * cell for v, c in zip(vals, counts) if v != 0}
    a0 = float(np.count_nonzero(inside0 & use)) * cell
    return WindingField(
        grid=grid, cell_area=cell, sector_areas=sectors,
        algebraic_area=float(sum(n_ * a for n_, a in sectors.items())),
        arithmetic_area=float(sum(sectors.values())) + a0,
        zero_sector_inside=a0, box=(x0, y0, side), boundary=bmask,
        boundary_area=float(np.count_nonzero(bmask)) * cell,
    )


@dataclass(frozen=True)
class PolygonSectors:
    """Sector areas of a polygon from its planar arrangement (no grid)."""

    sector_areas: dict
    algebraic_area: float
    arithmetic_area: float
    zero_sector_inside: float
    n_faces: int


def polygon_sectors(polygon):
    """Exact sector areas: node the polygon, take every bounded face, read its index.

    Each bounded face of the arrangement has one winding index, evaluated at a
    point inside it. The filled region is the union of the bounded faces, so
    its index-0 faces give A0 with no connectivity proxy.
    """
    from shapely.geometry import LineString
    from shapely.ops import polygonize, unary_union

    p = np.asarray(polygon, dtype=float)
    if p.ndim != 2 or p.shape[1] != 2 or p.shape[0] < 4 or not np.array_equal(p[0], p[-1]):
        raise ValueError("polygon must be a closed (m, 2) array with m >= 4")
    faces = list(polygonize(unary_union(LineString(p))))
    if not faces:
        return PolygonSectors({}, 0.0, 0.0, 0.0, 0)
    pts = np.array([f.representative_point().coords[0] for f in faces])
    area = np.array([f.area for f in faces])
    idx = np.asarray(kernels.winding_points(p[:, 0].copy(), p[:, 1].copy(), pts[:, 0].copy(),
                                            pts[:, 1].copy()))
    sectors = {}
    for v in np.unique(idx):
        if v != 0:
            sectors[int(v)] = float(math.fsum(area[idx == v]))
    a0 = float(math.fsum(area[idx == 0]))
    return PolygonSectors(
        sector_areas=sectors,
        algebraic_area=float(math.fsum(idx * area)),
        arithmetic_area=float(math.fsum(area)),
        zero_sector_inside=a0,
        n_faces=len(faces),
    )


def shoelace_area(polygon):
    p = np.asarray(polygon, dtype=float)
    x, y = p[:, 0], p[:, 1]
    return 0.5 * float(np.sum(x[:-1] * y[1:] - x[1:] * y[:-1]))


def sector_statistics(fields, n_max=3):
    """Means and standard errors of A_n (0 < |n| <= n_max), the algebraic and
    arithmetic areas and A0 over a list of fields."""
    if len(fields) < 2:
        raise ValueError("sector_statistics needs at least two fields")
    rep = ExperimentReport()
    for n_ in list(range(-n_max, 0)) + list(range(1, n_max + 1)):
        rep.add_samples(f"A_{n_}", [f.sector_areas.get(n_, 0.0) for f in fields])
    rep.add_samples("algebraic_area", [f.algebraic_area for f in fields])
    rep.add_samples("arithmetic_area", [f.arithmetic_area for f in fields])
    rep.add_samples("A0_inside", [f.zero_sector_inside for f in fields])
    return rep


def bridge_field(t, n_steps, resolution, seed, exclude_boundary=False, zero_links="cut"):
    return winding_field(sample_bridge(t, n_steps, seed), resolution=resolution,
                         exclude_boundary=exclude_boundary, zero_links=zero_links)


def field_batch(t, n, base_seed, n_steps, resolution, threads=1, exclude_boundary=False,
                zero_links="cut"):
    """Winding fields of ``n`` bridges; bridge ``i`` uses the stream ``(base_seed, i)``."""
    out = [None] * n

    def work(a, b):
        for i in range(a, b):
            out[i] = bridge_field(t, n_steps, resolution, (base_seed, i), exclude_boundary, zero_links)
        return np.zeros(0)

    map_blocks(work, n, block=max(1, min(16, n)), threads=threads)
    return out


def sector_expectation(n, t=1.0):
    """E(A_n) = t / (2 pi n^2) for n != 0."""
    if n == 0:
        raise ValueError("n must be nonzero")
    return t / (2.0 * math.pi * n * n)


ARITHMETIC_AREA_COEF = math.pi / 5
ZERO_SECTOR_COEF = math.pi / 30


def partition_deficit(alpha, n_max):
    """(1/2 pi t) sum_{0<|n|<=n_max} (exp(-2 pi i alpha n) - 1) E(A_n), with E(A_n) = t/(2 pi n^2).

    Symmetric in n, so it equals sum_{n=1}^{n_max} (cos(2 pi alpha n) - 1) / (2 pi^2 n^2).
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    if n_max < 1:
        raise ValueError(f"n_max must be at least 1, got {n_max}")
    n = np.arange(int(n_max), 0, -1, dtype=float)
    terms = (np.cos(2.0 * math.pi * np.mod(alpha * n, 1.0)) - 1.0) / (n * n)
    return math.fsum(terms) / (2.0 * math.pi ** 2)


def partition_deficit_limit(alpha):
    return -0.5 * alpha * (1.0 - alpha)
