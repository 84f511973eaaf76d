"""Event-stream encodings: voxel grids, event images, count-based slicing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigError
from .events import EventStream


@dataclass(frozen=True)
class VoxelGrid:
    """Signed polarity mass accumulated into temporal bins.

    Each event's polarity is split linearly between the two nearest bins
    of the normalized time axis; summing over bins therefore preserves
    the signed event count.
    """

    data: np.ndarray  # (bins, height, width) float64
    t_start: float
    t_end: float

    @property
    def bins(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True)
class EventGroup:
    """A slice produced by slice_by_count; `partial` marks a short tail."""

    events: EventStream
    partial: bool


def build_voxel_grid(
    events: EventStream,
    bins: int,
    window: tuple[float, float] | None = None,
    normalize: bool = False,
) -> VoxelGrid:
    """Accumulate an event stream into a (bins, H, W) voxel grid.

    The normalized coordinate t* = (t - t0) / (t1 - t0) * (bins - 1)
    places each polarity p as p*(1-frac) into bin floor(t*) and p*frac
    into the next bin; an event exactly at t1 lands fully in the last
    bin.  `normalize` divides by the max absolute value (if nonzero).
    """
    if bins < 1:
        raise ConfigError("bins must be >= 1")
    if window is None:
        t0, t1 = events.t_start, events.t_end
    else:
        t0, t1 = float(window[0]), float(window[1])
    if t1 < t0:
        raise ConfigError("empty window: t_end < t_start")

    n = len(events)
    if n:
        below = events.ts < t0
        above = events.ts > t1
        if below.any() or above.any():
            bad = int(np.flatnonzero(below | above)[0])
            raise ConfigError(
                f"event {bad} at t={events.ts[bad]} outside window [{t0}, {t1}]"
            )

    span = t1 - t0
    if n == 0 or span == 0.0 or bins == 1:
        tstar = np.zeros(n)
    else:
        tstar = (events.ts - t0) / span * (bins - 1)
        # guard roundoff at the closed right edge
        tstar = np.minimum(tstar, float(bins - 1))
    grid = _kernels.voxel_deposit(
        tstar, events.xs, events.ys, events.ps.astype(np.float64),
        bins, events.height, events.width,
    )
    if normalize:
        peak = np.abs(grid).max()
        if peak > 0:
            grid = grid / peak
    return VoxelGrid(grid, t0, t1)


def slice_by_count(events: EventStream, n_events: int) -> list[EventGroup]:
    """Split a stream into consecutive groups of exactly n_events.

    The trailing partial group (if any) is returned with partial=True.
    Concatenating the slices reproduces the input stream.
    """
    if n_events < 1:
        raise ConfigError("n_events must be >= 1")
    groups: list[EventGroup] = []
    n = len(events)
    for start in range(0, n, n_events):
        stop = min(start + n_events, n)
        sub = EventStream(
            events.xs[start:stop],
            events.ys[start:stop],
            events.ts[start:stop],
            events.ps[start:stop],
            events.width,
            events.height,
            float(events.ts[start]),
            float(events.ts[stop - 1]),
        )
        groups.append(EventGroup(sub, partial=(stop - start) < n_events))
    return groups


def event_image(events: EventStream) -> np.ndarray:
    """Signed per-pixel polarity sums as an (H, W) map."""
    img = np.zeros((events.height, events.width))
    np.add.at(img, (events.ys, events.xs), events.ps.astype(np.float64))
    return img
