"""Pure numpy implementations of the hot kernels.

Every function here has a twin with the same signature in the compiled
``_core`` extension. Both consume their random inputs in the same order, so
for identical inputs they agree to rounding.
"""

import numpy as np


def _flow_constants(k, mu):
    k2 = k * k
    kappa = np.sqrt(mu * mu + 4.0 * k2)
    if mu >= 0.0:
        zp = 2.0 / (mu + kappa)
        zm = -(mu + kappa) / (2.0 * k2)
    else:
        zp = (kappa - mu) / (2.0 * k2)
        zm = -2.0 / (kappa - mu)
    return kappa, zp, zm


def flow(z, length, k, mu):
    """Exact solution of Z' = 1 - k^2 Z^2 - mu Z after ``length`` (vectorised)."""
    z = np.asarray(z, dtype=float)
    length = np.asarray(length, dtype=float)
    if k * k == 0.0:  # also catches k whose square underflows
        if mu == 0.0:
            return z + length
        e = np.exp(-mu * length)
        return z * e - np.expm1(-mu * length) / mu
    kappa, zp, zm = _flow_constants(k, mu)
    e = np.exp(-kappa * length)
    r = (zp - zm) / (z - zm)
    u = (z - zp) / (z - zm) * e
    return zp + (z - zp) * r * e / (1.0 - u)


def riccati_events(z0, k, mu, offsets, gaps, jumps):
    """Alternate exact flow over ``gaps`` with multiplicative jumps, per replica.

    Replica ``i`` owns the events ``offsets[i]:offsets[i+1]``; event ``e`` first
    flows for ``gaps[e]`` and then applies ``z -> z * exp(-jumps[e])``.
    """
    z0 = np.asarray(z0, dtype=float)
    offsets = np.asarray(offsets, dtype=np.int64)
    gaps = np.asarray(gaps, dtype=float)
    jumps = np.asarray(jumps, dtype=float)
    n = z0.shape[0]
    counts = np.diff(offsets)
    z = z0.copy()
    if n == 0:
        return z
    # process the j-th event of every replica that has one, column by column
    for j in range(int(counts.max(initial=0))):
        rows = np.nonzero(counts > j)[0]
        idx = offsets[rows] + j
        z[rows] = flow(z[rows], gaps[idx], k, mu) * np.exp(-jumps[idx])
    return z


def exp_functional_events(mu, offsets, gaps, jumps):
    """Exact integral of exp(-W) for drift-plus-jumps paths, per replica."""
    offsets = np.asarray(offsets, dtype=np.int64)
    gaps = np.asarray(gaps, dtype=float)
    jumps = np.asarray(jumps, dtype=float)
    n = offsets.shape[0] - 1
    counts = np.diff(offsets)
    w = np.zeros(n)
    total = np.zeros(n)
    for j in range(int(counts.max(initial=0))):
        rows = np.nonzero(counts > j)[0]
        idx = offsets[rows] + j
        gap = gaps[idx]
        if mu == 0.0:
            seg = gap
        else:
            seg = -np.expm1(-mu * gap) / mu
        total[rows] += np.exp(-w[rows]) * seg
        w[rows] += mu * gap + jumps[idx]
    return total


def riccati_heun(z0, k, mu, sigma, dx, dB, logjump):
    """Stratonovich Heun steps of dZ = (1 - k^2 Z^2 - mu Z) dx - sigma Z o dB.

    ``dB`` holds Brownian increments (variance ``dx``), one row per replica.
    ``logjump`` is either empty or has the shape of ``dB``; its entries are
    applied as ``z -> z * exp(-logjump)`` at the end of each step.
    """
    z = np.array(z0, dtype=float, copy=True)
    dB = np.asarray(dB, dtype=float)
    logjump = np.asarray(logjump, dtype=float)
    has_jumps = logjump.size > 0
    k2 = k * k
    for j in range(dB.shape[1]):
        db = dB[:, j]
        f0 = 1.0 - k2 * z * z - mu * z
        zt = z + f0 * dx - sigma * z * db
        f1 = 1.0 - k2 * zt * zt - mu * zt
        z = z + 0.5 * (f0 + f1) * dx - 0.5 * sigma * (z + zt) * db
        if has_jumps:
            z = z * np.exp(-logjump[:, j])
    return z


def exp_functional_grid(mu, sigma, dx, dB):
    """Trapezoidal integral of exp(-(mu x + sigma B_x)) on a uniform grid."""
    dB = np.asarray(dB, dtype=float)
    n, steps = dB.shape
    w = np.zeros(n)
    e0 = np.ones(n)
    total = np.zeros(n)
    for j in range(steps):
        w = w + mu * dx + sigma * dB[:, j]
        e1 = np.exp(-w)
        total += 0.5 * dx * (e0 + e1)
        e0 = e1
    return total


def winding_walk(state, buf, t, eps, rstar2, skip_rel, skip_factor):
    """Advance planar Brownian paths until time ``t`` or until ``buf`` runs out.

    ``state`` is a float64 array of shape (n, 8) with columns
    x, y, tau, theta_plus, theta_minus, steps, skips, done; it is updated in
    place. Every action consumes two normals from the row's buffer: a
    Cartesian step of size ``eps * |Z|^2`` (the last one truncated to land on
    ``t``), or, when ``|Z|^2 < min(rstar2, skip_rel * (t - tau)) * skip_factor``,
    an exact jump over the excursion back to radius ``sqrt(min(...))``.
    """
    buf = np.asarray(buf, dtype=float)
    width = buf.shape[1]
    for col in range(0, width - 1, 2):
        act = np.nonzero(state[:, 7] == 0.0)[0]
        if act.size == 0:
            break
        s = state[act]
        x, y, tau = s[:, 0], s[:, 1], s[:, 2]
        n1 = buf[act, col]
        n2 = buf[act, col + 1]
        r2 = x * x + y * y
        rem = t - tau

        if skip_rel > 0.0:
            b2 = np.minimum(rstar2, skip_rel * rem)
            skip = r2 < b2 * skip_factor
        else:
            b2 = np.zeros_like(r2)
            skip = np.zeros(r2.shape, dtype=bool)

        # excursion shortcut
        if skip.any():
            sk = skip
            lr = 0.5 * np.log(b2[sk] / r2[sk])
            hit = lr * lr / np.maximum(n1[sk] * n1[sk], 1e-300)
            dth = np.sqrt(hit) * n2[sk]
            ang = np.arctan2(y[sk], x[sk]) + dth
            rad = np.sqrt(b2[sk])
            s[sk, 2] = tau[sk] + 0.5 * (b2[sk] - r2[sk])
            s[sk, 0] = rad * np.cos(ang)
            s[sk, 1] = rad * np.sin(ang)
            s[sk, 4] += dth
            s[sk, 6] += 1.0

        st = ~skip
        if st.any():
            xs, ys = x[st], y[st]
            dt = eps * r2[st]
            last = dt >= rem[st]
            dt = np.where(last, rem[st], dt)
            sq = np.sqrt(dt)
            nx = xs + sq * n1[st]
            ny = ys + sq * n2[st]
            dth = np.arctan2(xs * ny - ys * nx, xs * nx + ys * ny)
            mx = 0.5 * (xs + nx)
            my = 0.5 * (ys + ny)
            inner = mx * mx + my * my < rstar2
            s[st, 3] += np.where(inner, 0.0, dth)
            s[st, 4] += np.where(inner, dth, 0.0)
            s[st, 0] = nx
            s[st, 1] = ny
            s[st, 2] = np.where(last, t, tau[st] + dt)
            s[st, 5] += 1.0
            s[st, 7] = np.where(last, 1.0, 0.0)
        state[act] = s
    return state


def _row_crossings(xs, ys, y0, h, n):
    """Crossings of polygon edges with the horizontal lines through cell centres.

    Returns (row, x_cross, sign) arrays using the half-open rule
    ``min(y_a, y_b) <= y_c < max(y_a, y_b)``.
    """
    xa, xb = xs[:-1], xs[1:]
    ya, yb = ys[:-1], ys[1:]
    lo = np.minimum(ya, yb)
    hi = np.maximum(ya, yb)
    # rows i with lo <= y0 + (i + 0.5) h < hi
    i_lo = np.ceil((lo - y0) / h - 0.5).astype(np.int64)
    i_hi = np.ceil((hi - y0) / h - 0.5).astype(np.int64)
    i_lo = np.clip(i_lo, 0, n)
    i_hi = np.clip(i_hi, 0, n)
    cnt = i_hi - i_lo
    keep = cnt > 0
    edge = np.repeat(np.nonzero(keep)[0], cnt[keep])
    start = np.repeat(i_lo[keep], cnt[keep])
    within = np.arange(edge.size) - np.repeat(np.cumsum(cnt[keep]) - cnt[keep], cnt[keep])
    row = start + within
    yc = y0 + (row + 0.5) * h
    frac = (yc - ya[edge]) / (yb[edge] - ya[edge])
    xc = xa[edge] + frac * (xb[edge] - xa[edge])
    sign = np.where(yb[edge] > ya[edge], 1, -1)
    return row, xc, sign


def winding_raster(xs, ys, x0, y0, h, n):
    """Winding numbers at cell centres plus the grid links the polygon cuts.

    Cell (i, j) has centre (x0 + (j + 1/2) h, y0 + (i + 1/2) h). The index is
    the signed count of edge crossings on the ray to the right of the centre.
    ``cut_h[i, j]`` marks the link (i, j)-(i, j+1); ``cut_v[i, j]`` marks
    (i, j)-(i+1, j).
    """
    xs = np.ascontiguousarray(xs, dtype=float)
    ys = np.ascontiguousarray(ys, dtype=float)
    row, xc, sign = _row_crossings(xs, ys, y0, h, n)
    # number of centres strictly left of the crossing
    m = np.clip(np.ceil((xc - x0) / h - 0.5).astype(np.int64), 0, n)
    acc = np.zeros((n, n + 1), dtype=np.int64)
    np.add.at(acc, (row, np.zeros_like(row)), sign)
    np.add.at(acc, (row, m), -sign)
    winding = np.cumsum(acc, axis=1)[:, :n].astype(np.int32)

    hcount = np.zeros((n, n + 1), dtype=np.int64)
    np.add.at(hcount, (row, m), 1)
    cut_h = (hcount[:, 1:n] > 0).astype(np.uint8)

    col, yc, _ = _row_crossings(ys, xs, x0, h, n)
    mv = np.clip(np.ceil((yc - y0) / h - 0.5).astype(np.int64), 0, n)
    vcount = np.zeros((n + 1, n), dtype=np.int64)
    np.add.at(vcount, (mv, col), 1)
    cut_v = (vcount[1:n, :] > 0).astype(np.uint8)
    return winding, cut_h, cut_v


def boundary_mask(xs, ys, x0, y0, h, n, dist):
    """Flag cells whose centre lies within ``dist`` of some polygon edge."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    mask = np.zeros((n, n), dtype=np.uint8)
    xa, ya = xs[:-1], ys[:-1]
    dx, dy = xs[1:] - xa, ys[1:] - ya
    # split long edges so each piece fits a fixed candidate window
    pieces = np.maximum(1, np.ceil(np.hypot(dx, dy) / h).astype(np.int64))
    e = np.repeat(np.arange(xa.size), pieces)
    k = np.arange(e.size) - np.repeat(np.cumsum(pieces) - pieces, pieces)
    t0 = k / pieces[e]
    t1 = (k + 1) / pieces[e]
    px, py = xa[e] + t0 * dx[e], ya[e] + t0 * dy[e]
    qx, qy = xa[e] + t1 * dx[e], ya[e] + t1 * dy[e]
    w = int(np.ceil(dist / h)) + 2
    cj = np.floor((0.5 * (px + qx) - x0) / h).astype(np.int64)
    ci = np.floor((0.5 * (py + qy) - y0) / h).astype(np.int64)
    offs = np.arange(-w, w + 1)
    chunk = 4096
    for s in range(0, e.size, chunk):
        sl = slice(s, s + chunk)
        ii, jj = np.broadcast_arrays(ci[sl, None, None] + offs[None, :, None],
                                     cj[sl, None, None] + offs[None, None, :])
        cx = x0 + (jj + 0.5) * h
        cy = y0 + (ii + 0.5) * h
        ax, ay = px[sl, None, None], py[sl, None, None]
        ux, uy = (qx - px)[sl, None, None], (qy - py)[sl, None, None]
        ll = ux * ux + uy * uy
        tt = np.where(ll > 0, ((cx - ax) * ux + (cy - ay) * uy) / np.where(ll > 0, ll, 1.0), 0.0)
        tt = np.clip(tt, 0.0, 1.0)
        ddx = cx - (ax + tt * ux)
        ddy = cy - (ay + tt * uy)
        hit = (ddx * ddx + ddy * ddy <= dist * dist) & (ii >= 0) & (ii < n) & (jj >= 0) & (jj < n)
        mask[ii[hit], jj[hit]] = 1
    return mask


def winding_points(xs, ys, px, py):
    """Winding number of the closed polygon (xs, ys) around each point (px, py).

    Same rule as :func:`winding_raster`: signed crossings of the ray to the
    right, half-open in y.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    px = np.atleast_1d(np.asarray(px, dtype=float))
    py = np.atleast_1d(np.asarray(py, dtype=float))
    xa, xb, ya, yb = xs[:-1], xs[1:], ys[:-1], ys[1:]
    out = np.zeros(px.size, dtype=np.int64)
    step = max(1, 2_000_000 // max(1, xa.size))
    for s in range(0, px.size, step):
        qx = px[s:s + step, None]
        qy = py[s:s + step, None]
        hit = ((ya <= qy) & (qy < yb)) | ((yb <= qy) & (qy < ya))
        with np.errstate(divide="ignore", invalid="ignore"):
            xc = xa + (qy - ya) / (yb - ya) * (xb - xa)
        sgn = np.where(yb > ya, 1, -1)
        out[s:s + step] = np.sum(np.where(hit & (xc > qx), sgn, 0), axis=1)
    return out
