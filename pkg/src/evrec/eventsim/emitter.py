"""Per-pixel DVS event emission from a rendered frame sequence.

The model per pixel: intensity is mapped to lin-log brightness, passed
through an optional first-order lowpass, tilted by a deterministic leak
drift, and compared against per-pixel contrast thresholds.  Every full
threshold crossing between two frames emits one event at the linearly
interpolated crossing time.  Shot noise is injected as a per-pixel
Poisson process with balanced polarity, and a single greedy refractory
pass over signal and noise together suppresses events closer than
refractory_s to the previously kept event at the same pixel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .. import _kernels
from ..errors import ConfigError, DimensionError
from ..events import EventStream

_LINLOG_KNEE = 20.0  # intensity (in 0..255 units) where log takes over


@dataclass(frozen=True)
class SimParams:
    """Sensor model parameters; all rates in Hz, thresholds in log units."""

    threshold_mean: float = 0.3
    threshold_std: float = 0.03
    neg_pos_ratio_mean: float = 1.0
    neg_pos_ratio_std: float = 0.1
    cutoff_hz: float = 0.0
    refractory_s: float = 1e-3
    leak_rate_hz: float = 0.1
    shot_noise_hz: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.threshold_mean <= 0:
            raise ConfigError("threshold_mean must be > 0")
        if self.threshold_std < 0:
            raise ConfigError("threshold_std must be >= 0")
        if self.cutoff_hz < 0:
            raise ConfigError("cutoff_hz must be >= 0")
        if self.refractory_s < 0:
            raise ConfigError("refractory_s must be >= 0")
        if self.leak_rate_hz < 0 or self.shot_noise_hz < 0:
            raise ConfigError("noise rates must be >= 0")


MIN_THRESHOLD = 0.01


def lin_log(frame: np.ndarray) -> np.ndarray:
    """Map intensity in [0, 1] to lin-log brightness.

    ln(I*255) above the knee at 20; below it, the tangent line at the
    knee (value and slope matched), which keeps ln away from zero.
    """
    x = np.asarray(frame, dtype=np.float64) * 255.0
    knee = _LINLOG_KNEE
    return np.where(x >= knee, np.log(np.maximum(x, knee)), math.log(knee) + (x - knee) / knee)


def tonemap_log(frame: np.ndarray, floor: float = 0.05) -> np.ndarray:
    """Normalized log-brightness view of an intensity frame.

    Maps lin_log output affinely so intensity `floor` lands at 0 and
    full white at 1, clipping below.  This is the brightness axis the
    event stream actually measures, so event-integrating reconstructions
    are compared against references in this domain.
    """
    lo = float(lin_log(np.array(floor)))
    hi = float(lin_log(np.array(1.0)))
    return np.clip((lin_log(frame) - lo) / (hi - lo), 0.0, 1.0)


def _lowpass(levels: list[np.ndarray], times: Sequence[float], cutoff_hz: float) -> list[np.ndarray]:
    if cutoff_hz <= 0.0:
        return levels
    out = [levels[0]]
    state = levels[0]
    for i in range(1, len(levels)):
        dt = times[i] - times[i - 1]
        alpha = 1.0 - math.exp(-2.0 * math.pi * cutoff_hz * dt)
        state = state + alpha * (levels[i] - state)
        out.append(state)
    return out


def sample_thresholds(params: SimParams, height: int, width: int, rng: np.random.Generator):
    """Per-pixel positive thresholds and the shared neg/pos ratio."""
    c_pos = params.threshold_mean + params.threshold_std * rng.standard_normal((height, width))
    c_pos = np.maximum(c_pos, MIN_THRESHOLD)
    lam = params.neg_pos_ratio_mean + params.neg_pos_ratio_std * rng.standard_normal()
    c_neg = np.maximum(lam * c_pos, MIN_THRESHOLD)
    return c_pos, c_neg, float(lam)


def emit_events(
    frames: Sequence[np.ndarray],
    timestamps: Sequence[float],
    params: SimParams,
) -> EventStream:
    """Convert a timed frame sequence into an event stream.

    Deterministic given (frames, timestamps, params.seed).
    """
    if len(frames) < 2:
        raise ConfigError("need at least two frames")
    if len(frames) != len(timestamps):
        raise ConfigError("frames and timestamps differ in length")
    times = np.asarray(timestamps, dtype=np.float64)
    if np.any(np.diff(times) <= 0):
        raise ConfigError("timestamps must be strictly increasing")
    shape = frames[0].shape
    for i, f in enumerate(frames):
        if f.shape != shape:
            raise DimensionError(f"frame {i} has shape {f.shape}, expected {shape}")
    height, width = shape
    npix = height * width
    t0, t_end = float(times[0]), float(times[-1])

    rng = np.random.default_rng(params.seed)
    c_pos, c_neg, _ = sample_thresholds(params, height, width, rng)
    cp_flat = c_pos.ravel()
    cn_flat = c_neg.ravel()

    levels = [lin_log(f) for f in frames]
    levels = _lowpass(levels, times, params.cutoff_hz)
    if params.leak_rate_hz > 0.0:
        drift = params.leak_rate_hz * c_pos
        levels = [lev - drift * (t - t0) for lev, t in zip(levels, times)]

    l_mem = levels[0].ravel().copy()
    pix_parts, ts_parts, pol_parts = [], [], []
    for i in range(len(levels) - 1):
        pix, ts, pol = _kernels.crossing_candidates(
            l_mem,
            levels[i].ravel(),
            levels[i + 1].ravel(),
            cp_flat,
            cn_flat,
            float(times[i]),
            float(times[i + 1]),
        )
        if len(pix):
            pix_parts.append(pix)
            ts_parts.append(ts)
            pol_parts.append(pol)

    if params.shot_noise_hz > 0.0:
        span = t_end - t0
        counts = rng.poisson(params.shot_noise_hz * span, npix)
        total = int(counts.sum())
        if total:
            pix_parts.append(np.repeat(np.arange(npix, dtype=np.int64), counts))
            ts_parts.append(t0 + rng.random(total) * span)
            pol_parts.append((rng.integers(0, 2, total) * 2 - 1).astype(np.int8))

    if pix_parts:
        pix = np.concatenate(pix_parts)
        ts = np.concatenate(ts_parts)
        pol = np.concatenate(pol_parts)
    else:
        pix = np.zeros(0, dtype=np.int64)
        ts = np.zeros(0)
        pol = np.zeros(0, dtype=np.int8)

    # canonical per-pixel time order, then one refractory pass over
    # signal and noise jointly
    order = np.lexsort((pol, ts, pix))
    pix, ts, pol = pix[order], ts[order], pol[order]
    keep = _kernels.refractory_keep(pix, ts, params.refractory_s)
    pix, ts, pol = pix[keep], ts[keep], pol[keep]

    return EventStream.from_arrays(
        pix % width,
        pix // width,
        ts,
        pol,
        width,
        height,
        t_start=t0,
        t_end=t_end,
        sort=True,
    )
