"""Event and event-stream containers.

An event stream is stored column-wise (xs, ys, ts, ps) for speed; the
`Event` named view is provided for item access.  Streams are kept in
canonical order: nondecreasing timestamp, ties broken by (y, x, polarity).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np

from .errors import ConfigError


class Event(NamedTuple):
    x: int
    y: int
    t: float
    polarity: int


def canonical_order(xs, ys, ts, ps) -> np.ndarray:
    """Sort keys: primary t, then y, x, polarity."""
    return np.lexsort((ps, xs, ys, ts))


@dataclass(frozen=True)
class EventStream:
    """Ordered (x, y, t, polarity) events with sensor geometry."""

    xs: np.ndarray  # int64 pixel column
    ys: np.ndarray  # int64 pixel row
    ts: np.ndarray  # float64 seconds
    ps: np.ndarray  # int8, +1 or -1
    width: int
    height: int
    t_start: float
    t_end: float

    def __post_init__(self):
        n = len(self.ts)
        if not (len(self.xs) == len(self.ys) == len(self.ps) == n):
            raise ConfigError("event columns have mismatched lengths")
        if self.t_end < self.t_start:
            raise ConfigError("t_end must be >= t_start")
        if n:
            if np.any(np.diff(self.ts) < 0):
                raise ConfigError("event timestamps must be nondecreasing")
            if self.ts[0] < self.t_start or self.ts[-1] > self.t_end:
                raise ConfigError("events fall outside [t_start, t_end]")
            if (
                self.xs.min() < 0
                or self.xs.max() >= self.width
                or self.ys.min() < 0
                or self.ys.max() >= self.height
            ):
                raise ConfigError("event coordinates outside the sensor")
            bad = np.abs(self.ps) != 1
            if np.any(bad):
                raise ConfigError("polarity must be +1 or -1")

    @classmethod
    def from_arrays(
        cls,
        xs,
        ys,
        ts,
        ps,
        width: int,
        height: int,
        t_start: float | None = None,
        t_end: float | None = None,
        sort: bool = True,
    ) -> "EventStream":
        xs = np.asarray(xs, dtype=np.int64)
        ys = np.asarray(ys, dtype=np.int64)
        ts = np.asarray(ts, dtype=np.float64)
        ps = np.asarray(ps, dtype=np.int8)
        if sort and len(ts):
            order = canonical_order(xs, ys, ts, ps)
            xs, ys, ts, ps = xs[order], ys[order], ts[order], ps[order]
        if t_start is None:
            t_start = float(ts[0]) if len(ts) else 0.0
        if t_end is None:
            t_end = float(ts[-1]) if len(ts) else float(t_start)
        return cls(xs, ys, ts, ps, int(width), int(height), float(t_start), float(t_end))

    @classmethod
    def empty(cls, width: int, height: int, t_start: float = 0.0, t_end: float = 0.0):
        z = np.zeros(0)
        return cls(
            z.astype(np.int64),
            z.astype(np.int64),
            z.astype(np.float64),
            z.astype(np.int8),
            width,
            height,
            t_start,
            t_end,
        )

    def __len__(self) -> int:
        return len(self.ts)

    def __getitem__(self, i: int) -> Event:
        return Event(int(self.xs[i]), int(self.ys[i]), float(self.ts[i]), int(self.ps[i]))

    def __iter__(self) -> Iterator[Event]:
        for i in range(len(self)):
            yield self[i]

    def with_window(self, t_start: float, t_end: float) -> "EventStream":
        return EventStream(
            self.xs, self.ys, self.ts, self.ps, self.width, self.height, t_start, t_end
        )

    def equals(self, other: "EventStream") -> bool:
        return (
            self.width == other.width
            and self.height == other.height
            and self.t_start == other.t_start
            and self.t_end == other.t_end
            and np.array_equal(self.xs, other.xs)
            and np.array_equal(self.ys, other.ys)
            and np.array_equal(self.ts, other.ts)
            and np.array_equal(self.ps, other.ps)
        )


def concatenate(streams: list[EventStream]) -> EventStream:
    """Concatenate consecutive slices back into one stream."""
    if not streams:
        raise ConfigError("nothing to concatenate")
    w, h = streams[0].width, streams[0].height
    xs = np.concatenate([s.xs for s in streams])
    ys = np.concatenate([s.ys for s in streams])
    ts = np.concatenate([s.ts for s in streams])
    ps = np.concatenate([s.ps for s in streams])
    return EventStream.from_arrays(
        xs, ys, ts, ps, w, h,
        t_start=streams[0].t_start, t_end=streams[-1].t_end, sort=False,
    )
