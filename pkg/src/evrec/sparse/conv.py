"""Dense 2-d convolution primitives used by the sparse coder.

Plain zero-padded convolutions on (C, H, W) tensors, implemented with
stride tricks plus a tensordot so the heavy lifting lands in BLAS.
`conv2d_adjoint` is the exact matrix transpose of `conv2d` at stride 1
with 'same' padding, which the solver relies on for its gradient step.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import DimensionError


def conv2d(x: np.ndarray, kernel: np.ndarray, stride: int = 1, pad: int | None = None) -> np.ndarray:
    """Correlate x (Cin, H, W) with kernel (Cout, Cin, kh, kw)."""
    x = np.asarray(x, dtype=np.float64)
    kernel = np.asarray(kernel, dtype=np.float64)
    if x.ndim != 3 or kernel.ndim != 4:
        raise DimensionError("conv2d expects x (Cin,H,W) and kernel (Cout,Cin,kh,kw)")
    if x.shape[0] != kernel.shape[1]:
        raise DimensionError(
            f"channel mismatch: x has {x.shape[0]}, kernel expects {kernel.shape[1]}"
        )
    kh, kw = kernel.shape[2], kernel.shape[3]
    if pad is None:
        pad = kh // 2
    if pad:
        x = np.pad(x, ((0, 0), (pad, pad), (pad, pad)))
    if x.shape[1] < kh or x.shape[2] < kw:
        raise DimensionError("input smaller than kernel")
    win = sliding_window_view(x, (kh, kw), axis=(1, 2))
    if stride > 1:
        win = win[:, ::stride, ::stride]
    return np.tensordot(kernel, win, axes=([1, 2, 3], [0, 3, 4]))


def adjoint_kernel(kernel: np.ndarray) -> np.ndarray:
    """Kernel realizing the transpose of a same-padded stride-1 conv2d."""
    return kernel.transpose(1, 0, 2, 3)[:, :, ::-1, ::-1].copy()


def conv2d_adjoint(y: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Apply the exact adjoint of conv2d(., kernel) for odd same-padded kernels."""
    return conv2d(y, adjoint_kernel(kernel))


def upsample2_tconv(z: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Stride-2 transpose convolution doubling the spatial size.

    z (Cin, h, w), kernel (Cout, Cin, 4, 4) -> (Cout, 2h, 2w).  Each code
    scatters kernel-weighted mass around its upsampled position; a
    partition-of-unity kernel (e.g. bilinear) reproduces constants away
    from the border.
    """
    z = np.asarray(z, dtype=np.float64)
    kernel = np.asarray(kernel, dtype=np.float64)
    if z.ndim != 3 or kernel.ndim != 4 or kernel.shape[2:] != (4, 4):
        raise DimensionError("upsample2_tconv expects z (Cin,h,w) and kernel (Cout,Cin,4,4)")
    if z.shape[0] != kernel.shape[1]:
        raise DimensionError("channel mismatch in upsample2_tconv")
    cin, h, w = z.shape
    cout = kernel.shape[0]
    out = np.zeros((cout, 2 * h + 2, 2 * w + 2))
    for di in range(4):
        for dj in range(4):
            contrib = np.tensordot(kernel[:, :, di, dj], z, axes=(1, 0))
            out[:, di : di + 2 * h : 2, dj : dj + 2 * w : 2] += contrib
    return out[:, 1 : 1 + 2 * h, 1 : 1 + 2 * w]


def identity_kernel(channels: int, size: int = 3) -> np.ndarray:
    """Per-channel delta kernel: conv2d with it is the identity map."""
    k = np.zeros((channels, channels, size, size))
    mid = size // 2
    for c in range(channels):
        k[c, c, mid, mid] = 1.0
    return k


def bilinear_up_kernel(cout: int, cin: int) -> np.ndarray:
    """Separable [1,3,3,1]/4 kernel; sums to 4 so constants survive 2x upsampling."""
    k1 = np.array([1.0, 3.0, 3.0, 1.0]) / 4.0
    k2 = np.outer(k1, k1)
    k = np.zeros((cout, cin, 4, 4))
    k[:] = k2
    return k
