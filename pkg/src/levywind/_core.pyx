# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels; signatures mirror ``levywind._pure``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, expm1, sqrt, log, atan2, cos, sin, ceil, floor, fabs

cnp.import_array()


cdef struct FlowConst:
    double k2
    double mu
    double kappa
    double zp
    double zm
    bint linear


cdef FlowConst _flow_constants(double k, double mu) noexcept nogil:
    cdef FlowConst c
    c.k2 = k * k
    c.mu = mu
    c.linear = c.k2 == 0.0  # also catches k whose square underflows
    c.kappa = 0.0
    c.zp = 0.0
    c.zm = 0.0
    if not c.linear:
        c.kappa = sqrt(mu * mu + 4.0 * c.k2)
        if mu >= 0.0:
            c.zp = 2.0 / (mu + c.kappa)
            c.zm = -(mu + c.kappa) / (2.0 * c.k2)
        else:
            c.zp = (c.kappa - mu) / (2.0 * c.k2)
            c.zm = -2.0 / (c.kappa - mu)
    return c


cdef inline double _flow(double z, double length, FlowConst* c) noexcept nogil:
    cdef double e, r, u
    if c.linear:
        if c.mu == 0.0:
            return z + length
        return z * exp(-c.mu * length) - expm1(-c.mu * length) / c.mu
    e = exp(-c.kappa * length)
    r = (c.zp - c.zm) / (z - c.zm)
    u = (z - c.zp) / (z - c.zm) * e
    return c.zp + (z - c.zp) * r * e / (1.0 - u)


def flow(z, length, double k, double mu):
    cdef FlowConst c = _flow_constants(k, mu)
    zz, ll = np.broadcast_arrays(np.asarray(z, dtype=np.float64), np.asarray(length, dtype=np.float64))
    out = np.empty(zz.shape, dtype=np.float64)
    cdef const double[::1] zf = np.ascontiguousarray(zz).reshape(-1)
    cdef const double[::1] lf = np.ascontiguousarray(ll).reshape(-1)
    cdef double[::1] of = out.reshape(-1)
    cdef Py_ssize_t i
    for i in range(zf.shape[0]):
        of[i] = _flow(zf[i], lf[i], &c)
    if out.ndim == 0:
        return float(out)
    return out


def riccati_events(z0, double k, double mu, offsets, gaps, jumps):
    cdef double[::1] zv = np.array(z0, dtype=np.float64, copy=True)
    cdef const long long[::1] off = np.ascontiguousarray(offsets, dtype=np.int64)
    cdef const double[::1] g = np.ascontiguousarray(gaps, dtype=np.float64)
    cdef const double[::1] jp = np.ascontiguousarray(jumps, dtype=np.float64)
    cdef FlowConst c = _flow_constants(k, mu)
    cdef Py_ssize_t i, e
    cdef double z
    with nogil:
        for i in range(zv.shape[0]):
            z = zv[i]
            for e in range(off[i], off[i + 1]):
                z = _flow(z, g[e], &c) * exp(-jp[e])
            zv[i] = z
    return np.asarray(zv)


def exp_functional_events(double mu, offsets, gaps, jumps):
    cdef const long long[::1] off = np.ascontiguousarray(offsets, dtype=np.int64)
    cdef const double[::1] g = np.ascontiguousarray(gaps, dtype=np.float64)
    cdef const double[::1] jp = np.ascontiguousarray(jumps, dtype=np.float64)
    cdef Py_ssize_t n = off.shape[0] - 1
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i, e
    cdef double w, total, seg
    with nogil:
        for i in range(n):
            w = 0.0
            total = 0.0
            for e in range(off[i], off[i + 1]):
                if mu == 0.0:
                    seg = g[e]
                else:
                    seg = -expm1(-mu * g[e]) / mu
                total += exp(-w) * seg
                w += mu * g[e] + jp[e]
            o[i] = total
    return out


def riccati_heun(z0, double k, double mu, double sigma, double dx, dB, logjump):
    cdef double[::1] zv = np.array(z0, dtype=np.float64, copy=True)
    cdef const double[:, ::1] b = np.ascontiguousarray(dB, dtype=np.float64)
    lj_arr = np.ascontiguousarray(logjump, dtype=np.float64)
    cdef bint has_jumps = lj_arr.size > 0
    if not has_jumps:
        lj_arr = np.zeros((1, 1), dtype=np.float64)
    cdef const double[:, ::1] lj = lj_arr
    cdef double k2 = k * k
    cdef Py_ssize_t i, j, steps = b.shape[1]
    cdef double z, zt, f0, f1, db
    with nogil:
        for i in range(zv.shape[0]):
            z = zv[i]
            for j in range(steps):
                db = b[i, j]
                f0 = 1.0 - k2 * z * z - mu * z
                zt = z + f0 * dx - sigma * z * db
                f1 = 1.0 - k2 * zt * zt - mu * zt
                z = z + 0.5 * (f0 + f1) * dx - 0.5 * sigma * (z + zt) * db
                if has_jumps:
                    z = z * exp(-lj[i, j])
            zv[i] = z
    return np.asarray(zv)


def exp_functional_grid(double mu, double sigma, double dx, dB):
    cdef const double[:, ::1] b = np.ascontiguousarray(dB, dtype=np.float64)
    cdef Py_ssize_t n = b.shape[0], steps = b.shape[1]
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i, j
    cdef double w, e0, e1, total
    with nogil:
        for i in range(n):
            w = 0.0
            e0 = 1.0
            total = 0.0
            for j in range(steps):
                w = w + mu * dx + sigma * b[i, j]
                e1 = exp(-w)
                total += 0.5 * dx * (e0 + e1)
                e0 = e1
            o[i] = total
    return out


def winding_walk(state, buf, double t, double eps, double rstar2,
                 double skip_rel, double skip_factor):
    cdef double[:, ::1] s = state
    cdef const double[:, ::1] nb = np.ascontiguousarray(buf, dtype=np.float64)
    cdef Py_ssize_t n = s.shape[0], width = nb.shape[1]
    cdef Py_ssize_t i, col
    cdef double x, y, tau, thp, thm, steps, skips, done
    cdef double r2, rem, b2, lr, hit, dth, ang, rad, dt, sq, nx, ny, mx, my, n1
    cdef bint last
    with nogil:
        for i in range(n):
            x = s[i, 0]; y = s[i, 1]; tau = s[i, 2]
            thp = s[i, 3]; thm = s[i, 4]; steps = s[i, 5]; skips = s[i, 6]
            done = s[i, 7]
            col = 0
            while done == 0.0 and col + 1 < width:
                r2 = x * x + y * y
                rem = t - tau
                if skip_rel > 0.0:
                    b2 = rstar2
                    if skip_rel * rem < b2:
                        b2 = skip_rel * rem
                    if r2 < b2 * skip_factor:
                        n1 = nb[i, col]
                        lr = 0.5 * log(b2 / r2)
                        n1 = n1 * n1
                        if n1 < 1e-300:
                            n1 = 1e-300
                        hit = lr * lr / n1
                        dth = sqrt(hit) * nb[i, col + 1]
                        col += 2
                        ang = atan2(y, x) + dth
                        rad = sqrt(b2)
                        tau = tau + 0.5 * (b2 - r2)
                        x = rad * cos(ang)
                        y = rad * sin(ang)
                        thm += dth
                        skips += 1.0
                        continue
                dt = eps * r2
                last = dt >= rem
                if last:
                    dt = rem
                sq = sqrt(dt)
                nx = x + sq * nb[i, col]
                ny = y + sq * nb[i, col + 1]
                col += 2
                dth = atan2(x * ny - y * nx, x * nx + y * ny)
                mx = 0.5 * (x + nx)
                my = 0.5 * (y + ny)
                if mx * mx + my * my < rstar2:
                    thm += dth
                else:
                    thp += dth
                x = nx
                y = ny
                steps += 1.0
                if last:
                    tau = t
                    done = 1.0
                else:
                    tau = tau + dt
            s[i, 0] = x; s[i, 1] = y; s[i, 2] = tau
            s[i, 3] = thp; s[i, 4] = thm; s[i, 5] = steps; s[i, 6] = skips
            s[i, 7] = done
    return state


cdef inline Py_ssize_t _clip(Py_ssize_t v, Py_ssize_t lo, Py_ssize_t hi) noexcept nogil:
    if v < lo:
        return lo
    if v > hi:
        return hi
    return v


def winding_raster(xs, ys, double x0, double y0, double h, Py_ssize_t n):
    cdef const double[::1] X = np.ascontiguousarray(xs, dtype=np.float64)
    cdef const double[::1] Y = np.ascontiguousarray(ys, dtype=np.float64)
    acc_arr = np.zeros((n, n + 1), dtype=np.int64)
    hc_arr = np.zeros((n, n + 1), dtype=np.int64)
    vc_arr = np.zeros((n + 1, n), dtype=np.int64)
    cdef long long[:, ::1] acc = acc_arr
    cdef long long[:, ::1] hc = hc_arr
    cdef long long[:, ::1] vc = vc_arr
    cdef Py_ssize_t e, i, j, lo_i, hi_i, m
    cdef double xa, xb, ya, yb, lo, hi, c, frac, xc, yc
    cdef int sgn
    with nogil:
        for e in range(X.shape[0] - 1):
            xa = X[e]; xb = X[e + 1]; ya = Y[e]; yb = Y[e + 1]
            # horizontal lines through row centres
            if ya < yb:
                lo = ya; hi = yb; sgn = 1
            else:
                lo = yb; hi = ya; sgn = -1
            lo_i = _clip(<Py_ssize_t>ceil((lo - y0) / h - 0.5), 0, n)
            hi_i = _clip(<Py_ssize_t>ceil((hi - y0) / h - 0.5), 0, n)
            for i in range(lo_i, hi_i):
                c = y0 + (i + 0.5) * h
                frac = (c - ya) / (yb - ya)
                xc = xa + frac * (xb - xa)
                m = _clip(<Py_ssize_t>ceil((xc - x0) / h - 0.5), 0, n)
                acc[i, 0] += sgn
                acc[i, m] -= sgn
                hc[i, m] += 1
            # vertical lines through column centres
            if xa < xb:
                lo = xa; hi = xb
            else:
                lo = xb; hi = xa
            lo_i = _clip(<Py_ssize_t>ceil((lo - x0) / h - 0.5), 0, n)
            hi_i = _clip(<Py_ssize_t>ceil((hi - x0) / h - 0.5), 0, n)
            for j in range(lo_i, hi_i):
                c = x0 + (j + 0.5) * h
                frac = (c - xa) / (xb - xa)
                yc = ya + frac * (yb - ya)
                m = _clip(<Py_ssize_t>ceil((yc - y0) / h - 0.5), 0, n)
                vc[m, j] += 1
    winding = np.cumsum(acc_arr, axis=1)[:, :n].astype(np.int32)
    cut_h = (hc_arr[:, 1:n] > 0).astype(np.uint8)
    cut_v = (vc_arr[1:n, :] > 0).astype(np.uint8)
    return winding, cut_h, cut_v


def boundary_mask(xs, ys, double x0, double y0, double h, Py_ssize_t n, double dist):
    cdef const double[::1] X = np.ascontiguousarray(xs, dtype=np.float64)
    cdef const double[::1] Y = np.ascontiguousarray(ys, dtype=np.float64)
    mask_arr = np.zeros((n, n), dtype=np.uint8)
    cdef unsigned char[:, ::1] mask = mask_arr
    cdef Py_ssize_t e, i, j, i0, i1, j0, j1
    cdef double ax, ay, ux, uy, ll, cx, cy, tt, ddx, ddy, d2 = dist * dist
    cdef double minx, maxx, miny, maxy
    with nogil:
        for e in range(X.shape[0] - 1):
            ax = X[e]; ay = Y[e]
            ux = X[e + 1] - ax; uy = Y[e + 1] - ay
            ll = ux * ux + uy * uy
            minx = ax if ux >= 0 else ax + ux
            maxx = ax + ux if ux >= 0 else ax
            miny = ay if uy >= 0 else ay + uy
            maxy = ay + uy if uy >= 0 else ay
            j0 = _clip(<Py_ssize_t>floor((minx - dist - x0) / h - 0.5), 0, n)
            j1 = _clip(<Py_ssize_t>ceil((maxx + dist - x0) / h - 0.5) + 1, 0, n)
            i0 = _clip(<Py_ssize_t>floor((miny - dist - y0) / h - 0.5), 0, n)
            i1 = _clip(<Py_ssize_t>ceil((maxy + dist - y0) / h - 0.5) + 1, 0, n)
            for i in range(i0, i1):
                cy = y0 + (i + 0.5) * h
                for j in range(j0, j1):
                    if mask[i, j]:
                        continue
                    cx = x0 + (j + 0.5) * h
                    if ll > 0.0:
                        tt = ((cx - ax) * ux + (cy - ay) * uy) / ll
                        if tt < 0.0:
                            tt = 0.0
                        elif tt > 1.0:
                            tt = 1.0
                    else:
                        tt = 0.0
                    ddx = cx - (ax + tt * ux)
                    ddy = cy - (ay + tt * uy)
                    if ddx * ddx + ddy * ddy <= d2:
                        mask[i, j] = 1
    return mask_arr


def winding_points(xs, ys, px, py):
    cdef const double[::1] X = np.ascontiguousarray(xs, dtype=np.float64)
    cdef const double[::1] Y = np.ascontiguousarray(ys, dtype=np.float64)
    cdef const double[::1] PX = np.ascontiguousarray(px, dtype=np.float64)
    cdef const double[::1] PY = np.ascontiguousarray(py, dtype=np.float64)
    out_arr = np.zeros(PX.shape[0], dtype=np.int64)
    cdef long long[::1] out = out_arr
    cdef Py_ssize_t e, k, ne = X.shape[0] - 1, npt = PX.shape[0]
    cdef double xa, xb, ya, yb, qx, qy, xc
    cdef long long w
    with nogil:
        for k in range(npt):
            qx = PX[k]; qy = PY[k]; w = 0
            for e in range(ne):
                ya = Y[e]; yb = Y[e + 1]
                if ya <= qy < yb or yb <= qy < ya:
                    xa = X[e]; xb = X[e + 1]
                    xc = xa + (qy - ya) / (yb - ya) * (xb - xa)
                    if xc > qx:
                        w += 1 if yb > ya else -1
            out[k] = w
    return out_arr
