"""Quality metrics and training-style losses over frames, flows, and sequences.

Norms are realized as per-pixel means so values are resolution
independent; the flow L1 additionally averages over the two components.
The perceptual term of the reconstruction loss is a pluggable callback
and defaults to zero.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.ndimage import correlate1d

from .errors import ConfigError, DimensionError
from .warp import FlowField, forward_warp_frame

logger = logging.getLogger(__name__)

_perceptual_notice_shown = False


@dataclass(frozen=True)
class LossConfig:
    """Loss weighting constants."""

    lambda_tc: float = 5.0
    l0: int = 3
    lambda_p: float = 1.0
    phi: float = 0.8
    alpha_m: float = 50.0
    # "as_printed" uses phi**(R-i-1), which exceeds 1 at the last
    # iteration; "raft" uses the conventional phi**(R-i).
    weight_convention: str = "as_printed"

    def __post_init__(self):
        if self.lambda_tc < 0 or self.lambda_p < 0 or self.alpha_m < 0:
            raise ConfigError("loss weights must be >= 0")
        if self.l0 < 1:
            raise ConfigError("l0 must be >= 1")
        if self.phi <= 0:
            raise ConfigError("phi must be > 0")
        if self.weight_convention not in ("as_printed", "raft"):
            raise ConfigError("weight_convention must be 'as_printed' or 'raft'")


def _check_same_shape(a: np.ndarray, b: np.ndarray):
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")


def mse(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    _check_same_shape(a, b)
    d = a - b
    return float(np.mean(d * d))


def _gaussian_window(size: int = 11, sigma: float = 1.5) -> np.ndarray:
    half = (size - 1) / 2.0
    x = np.arange(size) - half
    w = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return w / w.sum()


def _windowed_mean(img: np.ndarray, w: np.ndarray) -> np.ndarray:
    half = len(w) // 2
    out = correlate1d(img, w, axis=0, mode="constant")
    out = correlate1d(out, w, axis=1, mode="constant")
    return out[half:-half, half:-half]


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Structural similarity with an 11x11 Gaussian window, sigma 1.5, range 1."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    _check_same_shape(a, b)
    if a.ndim != 2 or min(a.shape) < 11:
        raise DimensionError("ssim needs 2-d frames at least 11x11")
    w = _gaussian_window()
    c1 = 0.01**2
    c2 = 0.03**2
    mu_a = _windowed_mean(a, w)
    mu_b = _windowed_mean(b, w)
    var_a = _windowed_mean(a * a, w) - mu_a * mu_a
    var_b = _windowed_mean(b * b, w) - mu_b * mu_b
    cov = _windowed_mean(a * b, w) - mu_a * mu_b
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def m_weight(frame_warped_gt: np.ndarray, frame_gt: np.ndarray, alpha_m: float = 50.0) -> np.ndarray:
    """Per-pixel confidence exp(-alpha * err^2) downweighting bad warps."""
    a = np.asarray(frame_warped_gt, dtype=np.float64)
    b = np.asarray(frame_gt, dtype=np.float64)
    _check_same_shape(a, b)
    d = a - b
    return np.exp(-alpha_m * d * d)


def temporal_consistency_loss(
    frame_prev_hat: np.ndarray,
    frame_hat: np.ndarray,
    flow_gt: FlowField,
    weight_map: np.ndarray,
) -> float:
    """Weighted L1 between the flow-warped previous output and the current one."""
    warped = forward_warp_frame(frame_prev_hat, flow_gt)
    _check_same_shape(warped, np.asarray(frame_hat))
    _check_same_shape(warped, np.asarray(weight_map))
    return float(np.mean(np.abs(weight_map * (warped - frame_hat))))


def reconstruction_loss(
    frame_hat: np.ndarray,
    frame_gt: np.ndarray,
    perceptual: Callable[[np.ndarray, np.ndarray], float] | None = None,
) -> float:
    """Mean L1 plus (1 - SSIM) plus an optional perceptual term."""
    global _perceptual_notice_shown
    a = np.asarray(frame_hat, dtype=np.float64)
    b = np.asarray(frame_gt, dtype=np.float64)
    _check_same_shape(a, b)
    loss = float(np.mean(np.abs(a - b))) + (1.0 - ssim(a, b))
    if perceptual is None:
        if not _perceptual_notice_shown:
            logger.info("no perceptual plug-in configured; that term contributes 0")
            _perceptual_notice_shown = True
    else:
        loss += float(perceptual(a, b))
    return loss


def sequence_reconstruction_loss(
    rec_losses: Sequence[float],
    tc_losses: Sequence[float | None],
    cfg: LossConfig,
) -> float:
    """Sum of per-frame losses, with temporal terms entering from index l0 on.

    Both sequences are indexed t = 1..L; tc entries before l0 may be None.
    """
    length = len(rec_losses)
    if len(tc_losses) != length:
        raise ConfigError("rec and tc sequences must have equal length")
    if length < cfg.l0:
        raise ConfigError(f"sequence length {length} shorter than l0={cfg.l0}")
    total = float(sum(rec_losses))
    for t in range(cfg.l0, length + 1):
        term = tc_losses[t - 1]
        if term is None:
            raise ConfigError(f"missing temporal term at t={t}")
        total += cfg.lambda_tc * float(term)
    return total


def iteration_weights(r: int, phi: float = 0.8, convention: str = "as_printed") -> list[float]:
    """Per-iteration weights w_i for i = 1..r."""
    if r < 1:
        raise ConfigError("r must be >= 1")
    if phi <= 0:
        raise ConfigError("phi must be > 0")
    if convention == "as_printed":
        return [phi ** (r - i - 1) for i in range(1, r + 1)]
    if convention == "raft":
        return [phi ** (r - i) for i in range(1, r + 1)]
    raise ConfigError("convention must be 'as_printed' or 'raft'")


def resize_bilinear(img: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Bilinear resample with half-pixel-aligned centers and edge clamping."""
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    h2, w2 = shape
    if (h2, w2) == (h, w):
        return img.copy()
    sy = h / h2
    sx = w / w2
    ys = (np.arange(h2) + 0.5) * sy - 0.5
    xs = (np.arange(w2) + 0.5) * sx - 0.5
    ys = np.clip(ys, 0.0, h - 1.0)
    xs = np.clip(xs, 0.0, w - 1.0)
    y0 = np.floor(ys).astype(np.int64)
    x0 = np.floor(xs).astype(np.int64)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    top = img[np.ix_(y0, x0)] * (1.0 - fx) + img[np.ix_(y0, x1)] * fx
    bot = img[np.ix_(y1, x0)] * (1.0 - fx) + img[np.ix_(y1, x1)] * fx
    return top * (1.0 - fy) + bot * fy


def resize_flow(flow: FlowField, shape: tuple[int, int]) -> FlowField:
    """Bilinear flow resize with displacements rescaled to the new grid."""
    h2, w2 = shape
    su = w2 / flow.width
    sv = h2 / flow.height
    return FlowField(resize_bilinear(flow.u, shape) * su, resize_bilinear(flow.v, shape) * sv)


def build_flow_pyramid(flow_gt: FlowField, shapes: Sequence[tuple[int, int]]) -> list[FlowField]:
    return [resize_flow(flow_gt, s) for s in shapes]


def build_weight_pyramid(weight_map: np.ndarray, shapes: Sequence[tuple[int, int]]) -> list[np.ndarray]:
    return [resize_bilinear(weight_map, s) for s in shapes]


def flow_loss(
    flow_preds: Sequence[FlowField],
    flow_gt_pyramid: Sequence[FlowField],
    weight_pyramid: Sequence[np.ndarray],
    cfg: LossConfig,
) -> float:
    """Iteration-weighted masked L1 between predicted and reference flow levels."""
    r = len(flow_preds)
    if len(flow_gt_pyramid) != r or len(weight_pyramid) != r:
        raise DimensionError("pyramid levels do not match the prediction count")
    weights = iteration_weights(r, cfg.phi, cfg.weight_convention)
    total = 0.0
    for w_i, pred, gt, m in zip(weights, flow_preds, flow_gt_pyramid, weight_pyramid):
        if (pred.height, pred.width) != (gt.height, gt.width) or m.shape != (pred.height, pred.width):
            raise DimensionError("pyramid level shape mismatch")
        err = np.abs(m * (pred.u - gt.u)) + np.abs(m * (pred.v - gt.v))
        total += w_i * float(np.mean(err)) / 2.0
    return total


def photometric_loss(
    frames_gt: tuple[np.ndarray, np.ndarray],
    flow_preds: Sequence[FlowField],
    cfg: LossConfig,
) -> float:
    """Iteration-weighted L1 between flow-warped and target reference frames."""
    prev_full, cur_full = (np.asarray(f, dtype=np.float64) for f in frames_gt)
    _check_same_shape(prev_full, cur_full)
    weights = iteration_weights(len(flow_preds), cfg.phi, cfg.weight_convention)
    total = 0.0
    for w_i, pred in zip(weights, flow_preds):
        shape = (pred.height, pred.width)
        prev = resize_bilinear(prev_full, shape)
        cur = resize_bilinear(cur_full, shape)
        warped = forward_warp_frame(prev, pred)
        total += w_i * float(np.mean(np.abs(warped - cur)))
    return total


def epe(flow_pred: FlowField, flow_gt: FlowField, mask: np.ndarray | None = None) -> float:
    """Mean endpoint error in pixels, optionally over a boolean mask."""
    if (flow_pred.height, flow_pred.width) != (flow_gt.height, flow_gt.width):
        raise DimensionError("flow shapes differ")
    du = flow_pred.u - flow_gt.u
    dv = flow_pred.v - flow_gt.v
    err = np.sqrt(du * du + dv * dv)
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        _check_same_shape(err, mask)
        if not mask.any():
            raise ConfigError("empty evaluation mask")
        err = err[mask]
    return float(np.mean(err))


def outlier_pct(flow_pred: FlowField, flow_gt: FlowField) -> float:
    """Share of pixels (in %) with EPE > 3 px and > 5% of the reference magnitude."""
    if (flow_pred.height, flow_pred.width) != (flow_gt.height, flow_gt.width):
        raise DimensionError("flow shapes differ")
    du = flow_pred.u - flow_gt.u
    dv = flow_pred.v - flow_gt.v
    err = np.sqrt(du * du + dv * dv)
    mag = np.sqrt(flow_gt.u**2 + flow_gt.v**2)
    bad = (err > 3.0) & (err > 0.05 * mag)
    return float(100.0 * np.mean(bad))
