"""Forward warping of frames, code tensors, and raw events; FWL metric.

All warps use bilinear splatting: each source sample scatters its value
into the four pixels around its flow-displaced target with bilinear
weights.  Frame/code warps normalize by the accumulated weight and fill
zero-weight holes from the unwarped source, so degenerate flow degrades
toward "no warp" and zero flow is the exact identity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigError, DimensionError, NumericError
from .events import EventStream


@dataclass(frozen=True)
class FlowField:
    """Per-pixel displacement in pixels, forward in time.

    u is horizontal (column) displacement, v vertical (row).
    """

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        if self.u.shape != self.v.shape or self.u.ndim != 2:
            raise DimensionError("u and v must be matching 2-d arrays")
        if not (np.isfinite(self.u).all() and np.isfinite(self.v).all()):
            raise ConfigError("flow contains non-finite values")
        bound = float(max(self.height, self.width))
        if np.abs(self.u).max(initial=0.0) > bound or np.abs(self.v).max(initial=0.0) > bound:
            raise ConfigError("flow magnitude exceeds the sensor size")

    @property
    def height(self) -> int:
        return self.u.shape[0]

    @property
    def width(self) -> int:
        return self.u.shape[1]

    @classmethod
    def zero(cls, height: int, width: int) -> "FlowField":
        return cls(np.zeros((height, width)), np.zeros((height, width)))

    @classmethod
    def constant(cls, height: int, width: int, u: float, v: float) -> "FlowField":
        return cls(np.full((height, width), float(u)), np.full((height, width), float(v)))

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "FlowField":
        if arr.ndim != 3 or arr.shape[0] != 2:
            raise DimensionError("expected a (2, H, W) array")
        return cls(np.asarray(arr[0], dtype=np.float64), np.asarray(arr[1], dtype=np.float64))

    def to_array(self) -> np.ndarray:
        return np.stack([self.u, self.v])

    def scaled(self, s: float) -> "FlowField":
        return FlowField(self.u * s, self.v * s)


def _splat_grid(values: np.ndarray, flow: FlowField):
    """Splat (C, H, W) values along the flow; returns (acc, wsum)."""
    c, h, w = values.shape
    ys, xs = np.mgrid[0:h, 0:w]
    tx = (xs + flow.u).ravel()
    ty = (ys + flow.v).ravel()
    return _kernels.splat_bilinear(tx, ty, values.reshape(c, -1), h, w)


def forward_warp_codes(codes: np.ndarray, flow: FlowField) -> np.ndarray:
    """Forward-warp a (C, h, w) tensor, all channels sharing one weight buffer.

    Holes keep the unwarped value; no range clamping (codes are free reals).
    """
    codes = np.asarray(codes, dtype=np.float64)
    if codes.ndim != 3:
        raise DimensionError("codes must be (C, h, w)")
    if codes.shape[1:] != (flow.height, flow.width):
        raise DimensionError(
            f"codes {codes.shape[1:]} do not match flow {(flow.height, flow.width)}"
        )
    acc, wsum = _splat_grid(codes, flow)
    holes = wsum == 0.0
    out = np.empty_like(codes)
    np.divide(acc, wsum, out=out, where=~holes)
    for ch in range(codes.shape[0]):
        out[ch][holes] = codes[ch][holes]
    return out


def forward_warp_frame(frame: np.ndarray, flow: FlowField) -> np.ndarray:
    """Forward-warp an (H, W) intensity frame; output clamped to [0, 1]."""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim != 2:
        raise DimensionError("frame must be 2-d")
    if frame.shape != (flow.height, flow.width):
        raise DimensionError(f"frame {frame.shape} does not match flow")
    out = forward_warp_codes(frame[None], flow)[0]
    return np.clip(out, 0.0, 1.0)


def downsample_flow(flow: FlowField, factor: int = 2) -> FlowField:
    """Bilinear 2x downsample with displacement rescaled to the coarse grid.

    Odd dimensions are padded by edge replication first.
    """
    if factor != 2:
        raise ConfigError("only factor 2 is supported")
    u, v = flow.u, flow.v
    h, w = u.shape
    if h % 2 or w % 2:
        u = np.pad(u, ((0, h % 2), (0, w % 2)), mode="edge")
        v = np.pad(v, ((0, h % 2), (0, w % 2)), mode="edge")
    # 2x2 mean pooling is exactly the bilinear sample at the coarse cell
    # centers; displacements halve with the grid spacing.
    du = u.reshape(u.shape[0] // 2, 2, u.shape[1] // 2, 2).mean(axis=(1, 3)) / 2.0
    dv = v.reshape(v.shape[0] // 2, 2, v.shape[1] // 2, 2).mean(axis=(1, 3)) / 2.0
    return FlowField(du, dv)


def warp_events(events: EventStream, flow: FlowField, t_ref: float) -> np.ndarray:
    """Signed image of events transported to t_ref along the flow.

    The flow map is read as total displacement over the stream window, so
    each event moves by (t_ref - t_i) / (t_end - t_start) times the flow
    at its source pixel.  Polarities are splatted bilinearly; events that
    leave the frame drop their out-of-bounds share.
    """
    if flow.height != events.height or flow.width != events.width:
        raise DimensionError("flow does not cover the sensor")
    span = events.t_end - events.t_start
    if span <= 0.0:
        raise ConfigError("empty event window")
    rate = 1.0 / span
    dt = (t_ref - events.ts) * rate
    tx = events.xs + dt * flow.u[events.ys, events.xs]
    ty = events.ys + dt * flow.v[events.ys, events.xs]
    acc, _ = _kernels.splat_bilinear(
        tx, ty, events.ps.astype(np.float64)[None], events.height, events.width
    )
    return acc[0]


def image_variance(image: np.ndarray) -> float:
    """Population variance over all pixels."""
    image = np.asarray(image)
    if image.size == 0:
        raise ConfigError("empty image")
    return float(np.var(image))


def fwl(events: EventStream, flow: FlowField, t_ref: float) -> float:
    """Variance of the warped event image over the unwarped one.

    Values above 1 mean the flow sharpens the event image.
    """
    warped = warp_events(events, flow, t_ref)
    base = warp_events(events, FlowField.zero(events.height, events.width), t_ref)
    denom = image_variance(base)
    if denom == 0.0:
        raise NumericError("FWL undefined: unwarped event image has zero variance")
    return image_variance(warped) / denom
