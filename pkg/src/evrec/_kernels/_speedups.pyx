# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled versions of the hot kernels.

Semantics and floating-point accumulation order are contractually
identical to evrec._kernels._numpy; see the backend parity tests.
The extension is compiled with -ffp-contract=off so expressions round
exactly like the NumPy fallback.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport floor

cnp.import_array()

BACKEND = "compiled"


def splat_bilinear(xs, ys, values, int height, int width):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xs_ = np.ascontiguousarray(xs, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ys_ = np.ascontiguousarray(ys, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] vals = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t n = xs_.shape[0]
    cdef Py_ssize_t nchan = vals.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=3] acc = np.zeros((nchan, height, width))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] wsum = np.zeros((height, width))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w = np.empty(n)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] cx = np.empty(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] cy = np.empty(n, dtype=np.int64)

    cdef Py_ssize_t i, c
    cdef int dy, dx
    cdef double x0, y0, fx, fy, wx, wy
    cdef long icx, icy

    for dy in range(2):
        for dx in range(2):
            for i in range(n):
                x0 = floor(xs_[i])
                y0 = floor(ys_[i])
                fx = xs_[i] - x0
                fy = ys_[i] - y0
                wx = fx if dx else 1.0 - fx
                wy = fy if dy else 1.0 - fy
                w[i] = wx * wy
                cx[i] = (<long> x0) + dx
                cy[i] = (<long> y0) + dy
            for i in range(n):
                icx = cx[i]
                icy = cy[i]
                if 0 <= icx < width and 0 <= icy < height:
                    wsum[icy, icx] += w[i]
            for c in range(nchan):
                for i in range(n):
                    icx = cx[i]
                    icy = cy[i]
                    if 0 <= icx < width and 0 <= icy < height:
                        acc[c, icy, icx] += w[i] * vals[c, i]
    return np.asarray(acc), np.asarray(wsum)


def voxel_deposit(tstar, xs, ys, ps, int bins, int height, int width):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ts_ = np.ascontiguousarray(tstar, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] xs_ = np.ascontiguousarray(xs, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] ys_ = np.ascontiguousarray(ys, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ps_ = np.ascontiguousarray(ps, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=3] grid = np.zeros((bins, height, width))
    cdef Py_ssize_t n = ts_.shape[0]
    cdef Py_ssize_t i
    cdef double b0f, frac
    cdef long b0

    for i in range(n):
        b0f = floor(ts_[i])
        frac = ts_[i] - b0f
        b0 = <long> b0f
        grid[b0, ys_[i], xs_[i]] += ps_[i] * (1.0 - frac)
    for i in range(n):
        b0f = floor(ts_[i])
        frac = ts_[i] - b0f
        b0 = <long> b0f
        if b0 + 1 < bins:
            grid[b0 + 1, ys_[i], xs_[i]] += ps_[i] * frac
    return np.asarray(grid)


def crossing_candidates(l_mem, l_a, l_b, c_pos, c_neg, double t_a, double t_b):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] lmem = np.ascontiguousarray(l_mem, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] la = np.ascontiguousarray(l_a, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] lb = np.ascontiguousarray(l_b, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cp = np.ascontiguousarray(c_pos, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cn = np.ascontiguousarray(c_neg, dtype=np.float64)
    if lmem is not l_mem:
        raise TypeError("l_mem must be a contiguous float64 array (updated in place)")

    cdef Py_ssize_t npix = lmem.shape[0]
    cdef Py_ssize_t p
    cdef long k, npos, nneg
    cdef double d, span, dt, lev, delta
    cdef long total = 0

    for p in range(npix):
        d = lb[p] - lmem[p]
        if d >= cp[p]:
            total += <long> floor(d / cp[p])
        elif (-d) >= cn[p]:
            total += <long> floor((-d) / cn[p])

    cdef cnp.ndarray[cnp.int64_t, ndim=1] pix_out = np.empty(total, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ts_out = np.empty(total, dtype=np.float64)
    cdef cnp.ndarray[cnp.int8_t, ndim=1] pol_out = np.empty(total, dtype=np.int8)

    dt = t_b - t_a
    cdef long at = 0
    for p in range(npix):
        d = lb[p] - lmem[p]
        npos = 0
        nneg = 0
        if d >= cp[p]:
            npos = <long> floor(d / cp[p])
        elif (-d) >= cn[p]:
            nneg = <long> floor((-d) / cn[p])
        if npos == 0 and nneg == 0:
            continue
        span = lb[p] - la[p]
        for k in range(1, npos + 1):
            lev = lmem[p] + k * cp[p]
            pix_out[at] = p
            ts_out[at] = t_a + (lev - la[p]) / span * dt
            pol_out[at] = 1
            at += 1
        for k in range(1, nneg + 1):
            lev = lmem[p] - k * cn[p]
            pix_out[at] = p
            ts_out[at] = t_a + (lev - la[p]) / span * dt
            pol_out[at] = -1
            at += 1
        delta = npos * cp[p] - nneg * cn[p]
        lmem[p] += delta
    return np.asarray(pix_out), np.asarray(ts_out), np.asarray(pol_out)


def refractory_keep(pix, ts, double refractory):
    cdef cnp.ndarray[cnp.int64_t, ndim=1] pix_ = np.ascontiguousarray(pix, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ts_ = np.ascontiguousarray(ts, dtype=np.float64)
    cdef Py_ssize_t n = ts_.shape[0]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1, cast=True] keep = np.ones(n, dtype=bool)
    if refractory <= 0.0 or n == 0:
        return np.asarray(keep)
    cdef long last_pix = -1
    cdef double last_t = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        if pix_[i] != last_pix:
            last_pix = pix_[i]
            last_t = ts_[i]
        elif ts_[i] - last_t >= refractory:
            last_t = ts_[i]
        else:
            keep[i] = False
    return np.asarray(keep)
