"""Pure NumPy implementations of the hot kernels.

These are the reference semantics; the compiled module in _speedups.pyx
must produce bit-identical output.  Accumulation order matters for
floating point, so every scatter walks its points in array order, one
corner (or bin) pass at a time, exactly as the compiled loops do.
"""

from __future__ import annotations

import numpy as np

BACKEND = "numpy"


def splat_bilinear(xs, ys, values, height, width):
    """Scatter per-point channel values to continuous target positions.

    xs, ys : float64 (n,) target coordinates.
    values : float64 (c, n) channel values carried by each point.
    Returns (acc (c, height, width), wsum (height, width)).  Corners that
    fall outside the image are dropped.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    nchan = values.shape[0]
    acc = np.zeros((nchan, height, width))
    wsum = np.zeros((height, width))

    x0 = np.floor(xs)
    y0 = np.floor(ys)
    fx = xs - x0
    fy = ys - y0
    ix0 = x0.astype(np.int64)
    iy0 = y0.astype(np.int64)

    # Corner order (y0,x0), (y0,x1), (y1,x0), (y1,x1) is part of the
    # backend contract.
    for dy, dx in ((0, 0), (0, 1), (1, 0), (1, 1)):
        cx = ix0 + dx
        cy = iy0 + dy
        wx = fx if dx else 1.0 - fx
        wy = fy if dy else 1.0 - fy
        w = wx * wy
        m = (cx >= 0) & (cx < width) & (cy >= 0) & (cy < height)
        np.add.at(wsum, (cy[m], cx[m]), w[m])
        for c in range(nchan):
            np.add.at(acc[c], (cy[m], cx[m]), w[m] * values[c][m])
    return acc, wsum


def voxel_deposit(tstar, xs, ys, ps, bins, height, width):
    """Accumulate signed polarities into temporal bins with linear split.

    tstar : float64 (n,) normalized bin coordinate in [0, bins-1].
    xs, ys : int64 pixel coordinates; ps : float64 polarities.
    """
    tstar = np.asarray(tstar, dtype=np.float64)
    ps = np.asarray(ps, dtype=np.float64)
    grid = np.zeros((bins, height, width))
    if len(tstar) == 0:
        return grid
    b0f = np.floor(tstar)
    frac = tstar - b0f
    b0 = b0f.astype(np.int64)
    np.add.at(grid, (b0, ys, xs), ps * (1.0 - frac))
    m = b0 + 1 < bins
    np.add.at(grid, (b0[m] + 1, ys[m], xs[m]), ps[m] * frac[m])
    return grid


def crossing_candidates(l_mem, l_a, l_b, c_pos, c_neg, t_a, t_b):
    """Enumerate threshold crossings for one frame pair, per pixel.

    l_mem is the flat (p,) per-pixel memorized level and is advanced in
    place by the crossed amount.  l_a/l_b are the (filtered) levels at
    the pair endpoints.  Returns (pix int64, ts float64, pols int8),
    unsorted.
    """
    d = l_b - l_mem
    pos = d >= c_pos
    neg = (-d) >= c_neg
    npos = np.zeros(len(l_mem), dtype=np.int64)
    nneg = np.zeros(len(l_mem), dtype=np.int64)
    if pos.any():
        npos[pos] = np.floor(d[pos] / c_pos[pos]).astype(np.int64)
    if neg.any():
        nneg[neg] = np.floor((-d[neg]) / c_neg[neg]).astype(np.int64)

    total = int(npos.sum() + nneg.sum())
    pix_out = np.empty(total, dtype=np.int64)
    ts_out = np.empty(total, dtype=np.float64)
    pol_out = np.empty(total, dtype=np.int8)
    if total:
        idx = np.arange(len(l_mem), dtype=np.int64)
        span = l_b - l_a
        dt = t_b - t_a
        at = 0
        kmax = int(max(npos.max(initial=0), nneg.max(initial=0)))
        for k in range(1, kmax + 1):
            mp = npos >= k
            if mp.any():
                lev = l_mem[mp] + k * c_pos[mp]
                tt = t_a + (lev - l_a[mp]) / span[mp] * dt
                n = int(mp.sum())
                pix_out[at : at + n] = idx[mp]
                ts_out[at : at + n] = tt
                pol_out[at : at + n] = 1
                at += n
            mn = nneg >= k
            if mn.any():
                lev = l_mem[mn] - k * c_neg[mn]
                tt = t_a + (lev - l_a[mn]) / span[mn] * dt
                n = int(mn.sum())
                pix_out[at : at + n] = idx[mn]
                ts_out[at : at + n] = tt
                pol_out[at : at + n] = -1
                at += n
        delta = npos * c_pos - nneg * c_neg
        l_mem += delta
    return pix_out, ts_out, pol_out


def refractory_keep(pix, ts, refractory):
    """Greedy refractory pass over events sorted by (pixel, t).

    An event is kept when at least `refractory` seconds passed since the
    previously *kept* event at the same pixel.
    """
    n = len(ts)
    keep = np.ones(n, dtype=bool)
    if refractory <= 0.0 or n == 0:
        return keep
    last_pix = -1
    last_t = 0.0
    for i in range(n):
        p = pix[i]
        if p != last_pix:
            last_pix = p
            last_t = ts[i]
        elif ts[i] - last_t >= refractory:
            last_t = ts[i]
        else:
            keep[i] = False
    return keep
