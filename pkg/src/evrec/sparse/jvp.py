"""Forward-mode directional derivative of a smoothed reconstruction pass.

The hard shrinkage is replaced by the softplus-gated surrogate
s(v) = softplus(v - theta) - softplus(-v - theta), which matches soft
thresholding outside the dead zone but is differentiable everywhere.
Used by the derivative check that compares this analytic tangent against
central finite differences; not part of the reconstruction path.
"""

from __future__ import annotations

import numpy as np

from .cista import CistaState, CistaWeights, _as_voxel_array, softplus
from .conv import conv2d, upsample2_tconv


def smooth_soft_threshold(v: np.ndarray, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    if theta.ndim == 1:
        theta = theta[:, None, None]
    return softplus(v - theta) - softplus(-v - theta)


class _Dual:
    """Value/tangent pair with the few ops the forward pass needs."""

    __slots__ = ("val", "tan")

    def __init__(self, val, tan):
        self.val = val
        self.tan = tan

    def __add__(self, other):
        if isinstance(other, _Dual):
            return _Dual(self.val + other.val, self.tan + other.tan)
        return _Dual(self.val + other, self.tan)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, _Dual):
            return _Dual(self.val - other.val, self.tan - other.tan)
        return _Dual(self.val - other, self.tan)

    def __rsub__(self, other):
        return _Dual(other - self.val, -self.tan)

    def __mul__(self, other):
        if isinstance(other, _Dual):
            return _Dual(self.val * other.val, self.tan * other.val + self.val * other.tan)
        return _Dual(self.val * other, self.tan * other)

    __rmul__ = __mul__


def _conv(x: _Dual, k) -> _Dual:
    return _Dual(conv2d(x.val, k), conv2d(x.tan, k))


def _conv_s2(x: _Dual, k) -> _Dual:
    return _Dual(conv2d(x.val, k, stride=2, pad=0), conv2d(x.tan, k, stride=2, pad=0))


def _tconv(x: _Dual, k) -> _Dual:
    return _Dual(upsample2_tconv(x.val, k), upsample2_tconv(x.tan, k))


def _sigmoid_d(x: _Dual) -> _Dual:
    s = 1.0 / (1.0 + np.exp(-x.val))
    return _Dual(s, s * (1.0 - s) * x.tan)


def _tanh_d(x: _Dual) -> _Dual:
    t = np.tanh(x.val)
    return _Dual(t, (1.0 - t * t) * x.tan)


def _smooth_shrink_d(x: _Dual, theta) -> _Dual:
    theta = np.asarray(theta, dtype=np.float64)[:, None, None]
    val = softplus(x.val - theta) - softplus(-x.val - theta)
    sig = lambda u: 1.0 / (1.0 + np.exp(-u))
    grad = sig(x.val - theta) + sig(-x.val - theta)
    return _Dual(val, grad * x.tan)


def cista_forward_smooth_jvp(
    events,
    frame_warped: np.ndarray,
    codes_warped: np.ndarray,
    a: np.ndarray,
    c: np.ndarray,
    weights: CistaWeights,
    tangents: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray],
) -> tuple[np.ndarray, np.ndarray]:
    """Smoothed forward pass returning (frame, directional derivative).

    `tangents` is the direction (dE, dI, dZ, da, dc).  The returned frame
    is the pre-clamp synthesis output of the smooth configuration.
    """
    d_e, d_i, d_z, d_a, d_c = tangents
    e = _Dual(_as_voxel_array(events), np.asarray(d_e, dtype=np.float64))
    frame = _Dual(np.asarray(frame_warped, dtype=np.float64)[None], np.asarray(d_i, dtype=np.float64)[None])
    z_prev = _Dual(np.asarray(codes_warped, dtype=np.float64), np.asarray(d_z, dtype=np.float64))
    a_st = _Dual(np.asarray(a, dtype=np.float64), np.asarray(d_a, dtype=np.float64))
    c_st = _Dual(np.asarray(c, dtype=np.float64), np.asarray(d_c, dtype=np.float64))
    w = weights

    x = _conv_s2(e, w["fusion.w_e"]) + _conv_s2(frame, w["fusion.w_i"]) + w["fusion.b"][:, None, None]

    def gate(name):
        return (
            _conv(x, w[f"lstc.w_x{name}"]) + _conv(z_prev, w[f"lstc.w_z{name}"])
            + w[f"lstc.b_{name}"][:, None, None]
        )

    f = _sigmoid_d(gate("f"))
    i = _sigmoid_d(gate("i"))
    cand = _tanh_d(gate("c"))
    c_new = f * c_st + i * cand
    o = _sigmoid_d(gate("o"))
    z = o * _tanh_d(c_new) + _conv(z_prev, w["lstc.w_skip"])

    for j in range(w.arch.num_blocks):
        r = x - _conv(z, w[f"blocks.{j}.analysis"])
        z = _smooth_shrink_d(z + _conv(r, w[f"blocks.{j}.backproj"]), w.theta(j))

    g = _sigmoid_d(_conv(z, w["lsrc.w_g"]) + _conv(a_st, w["lsrc.u_g"]) + w["lsrc.b_g"][:, None, None])
    cand = _tanh_d(_conv(z, w["lsrc.w_c"]) + _conv(a_st, w["lsrc.u_c"]) + w["lsrc.b_c"][:, None, None])
    a_new = g * a_st + (1.0 - g) * cand
    pre = _tconv(z, w["lsrc.d_i"]) + _tconv(a_new, w["lsrc.d_a"]) + w["lsrc.b_i"][0]
    return pre.val[0], pre.tan[0]


def cista_forward_smooth(
    events,
    frame_warped: np.ndarray,
    codes_warped: np.ndarray,
    a: np.ndarray,
    c: np.ndarray,
    weights: CistaWeights,
) -> np.ndarray:
    """Primal of the smoothed pass (used to finite-difference the tangent)."""
    zeros = (
        np.zeros_like(_as_voxel_array(events)),
        np.zeros_like(np.asarray(frame_warped, dtype=np.float64)),
        np.zeros_like(codes_warped),
        np.zeros_like(a),
        np.zeros_like(c),
    )
    out, _ = cista_forward_smooth_jvp(events, frame_warped, codes_warped, a, c, weights, zeros)
    return out
