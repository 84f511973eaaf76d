"""Procedural textures defined on an unbounded continuous plane.

Being analytic in the sample coordinates makes warped renders exact:
shifting the camera by one pixel reproduces the shifted image bit for
bit, which the motion tests rely on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, InputFormatError

_KINDS = ("checker", "noise", "bars", "flat", "image")


@dataclass(frozen=True)
class TextureSpec:
    kind: str
    seed: int = 0
    scale: float = 8.0
    level: float = 0.5  # flat textures only
    path: str | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ConfigError(f"unknown texture kind {self.kind!r}; expected one of {_KINDS}")
        if self.scale <= 0:
            raise ConfigError("texture scale must be positive")
        if not 0.0 <= self.level <= 1.0:
            raise ConfigError("flat texture level must be in [0, 1]")
        if self.kind == "image" and not self.path:
            raise ConfigError("image texture requires a path")


def _mix64(h: np.ndarray) -> np.ndarray:
    h = h.copy()
    h ^= h >> np.uint64(30)
    h *= np.uint64(0xBF58476D1CE4E5B9)
    h ^= h >> np.uint64(27)
    h *= np.uint64(0x94D049BB133111EB)
    h ^= h >> np.uint64(31)
    return h


def _lattice01(ix: np.ndarray, iy: np.ndarray, seed: int) -> np.ndarray:
    """Deterministic uniform value per integer lattice point."""
    seed_term = np.uint64((seed * 0xD6E8FEB86659FD93) & 0xFFFFFFFFFFFFFFFF)
    h = (
        ix.astype(np.int64).astype(np.uint64) * np.uint64(0x9E3779B97F4A7C15)
        ^ iy.astype(np.int64).astype(np.uint64) * np.uint64(0xC2B2AE3D27D4EB4F)
        ^ seed_term
    )
    return _mix64(h).astype(np.float64) / float(2**64)


def _value_noise(x: np.ndarray, y: np.ndarray, seed: int) -> np.ndarray:
    x0 = np.floor(x)
    y0 = np.floor(y)
    fx = x - x0
    fy = y - y0
    sx = fx * fx * (3.0 - 2.0 * fx)
    sy = fy * fy * (3.0 - 2.0 * fy)
    v00 = _lattice01(x0, y0, seed)
    v10 = _lattice01(x0 + 1, y0, seed)
    v01 = _lattice01(x0, y0 + 1, seed)
    v11 = _lattice01(x0 + 1, y0 + 1, seed)
    top = v00 + (v10 - v00) * sx
    bot = v01 + (v11 - v01) * sx
    return top + (bot - top) * sy


def load_image_texture(path: str) -> np.ndarray:
    from PIL import Image

    try:
        with Image.open(path) as im:
            arr = np.asarray(im.convert("F"), dtype=np.float64)
    except FileNotFoundError:
        raise
    except OSError as exc:
        raise InputFormatError(f"cannot read texture image {path}: {exc}") from exc
    peak = arr.max()
    if peak > 1.0:
        arr = arr / 255.0
    return np.clip(arr, 0.0, 1.0)


class _ImageCache:
    def __init__(self):
        self._data: dict[str, np.ndarray] = {}

    def get(self, path: str) -> np.ndarray:
        if path not in self._data:
            self._data[path] = load_image_texture(path)
        return self._data[path]


_images = _ImageCache()


def sample_texture(spec: TextureSpec, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Evaluate the texture at continuous plane coordinates; result in [0, 1]."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if spec.kind == "checker":
        parity = (np.floor(x / spec.scale) + np.floor(y / spec.scale)) % 2.0
        return np.where(parity == 0.0, 0.25, 0.85)
    if spec.kind == "noise":
        base = _value_noise(x / spec.scale, y / spec.scale, spec.seed)
        fine = _value_noise(x * (2.0 / spec.scale) + 31.7, y * (2.0 / spec.scale) - 17.3, spec.seed + 1)
        v = 0.65 * base + 0.35 * fine
        return 0.1 + 0.8 * v
    if spec.kind == "bars":
        frac = np.mod(x / spec.scale, 1.0)
        tri = 1.0 - np.abs(2.0 * frac - 1.0)
        return 0.15 + 0.7 * tri
    if spec.kind == "flat":
        return np.full(np.broadcast(x, y).shape, spec.level)
    # image: bilinear sample with edge clamping
    img = _images.get(spec.path)
    h, w = img.shape
    xc = np.clip(x, 0.0, w - 1.0)
    yc = np.clip(y, 0.0, h - 1.0)
    x0 = np.floor(xc).astype(np.int64)
    y0 = np.floor(yc).astype(np.int64)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = xc - x0
    fy = yc - y0
    top = img[y0, x0] * (1.0 - fx) + img[y0, x1] * fx
    bot = img[y1, x0] * (1.0 - fx) + img[y1, x1] * fx
    return top * (1.0 - fy) + bot * fy
