"""Synthetic scenes under 2-d affine motion.

A scene is a moving textured background plus up to ten textured
rectangles composited over it, each following its own affine trajectory
(translation, rotation about the element center, exponential scaling).
Because poses are analytic in t, renders, exact ground-truth flow, and
adaptive timestepping all come from the same closed-form transforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from ..warp import FlowField
from .textures import TextureSpec, sample_texture

MAX_OBJECTS = 10
TIMESTEP_FLOOR = 1e-5
TIMESTEP_CEIL = 0.1


@dataclass(frozen=True)
class AffineMotion:
    """Velocity of a scene element: translation px/s, rotation rad/s, scale 1/s."""

    vx: float = 0.0
    vy: float = 0.0
    omega: float = 0.0
    scale_rate: float = 0.0

    def is_static(self) -> bool:
        return self.vx == 0.0 and self.vy == 0.0 and self.omega == 0.0 and self.scale_rate == 0.0


@dataclass(frozen=True)
class SceneObject:
    texture: TextureSpec
    center: tuple[float, float]
    size: tuple[float, float]
    angle: float = 0.0
    motion: AffineMotion = field(default_factory=AffineMotion)

    def __post_init__(self):
        if self.size[0] <= 0 or self.size[1] <= 0:
            raise ConfigError("object size must be positive")


@dataclass(frozen=True)
class SceneConfig:
    width: int
    height: int
    duration: float
    background: TextureSpec
    background_motion: AffineMotion = field(default_factory=AffineMotion)
    objects: tuple[SceneObject, ...] = ()
    object_count: int | None = None

    def __post_init__(self):
        if self.width < 16 or self.height < 16:
            raise ConfigError("width and height must be >= 16")
        if self.duration <= 0:
            raise ConfigError("duration must be positive")
        if not isinstance(self.objects, tuple):
            object.__setattr__(self, "objects", tuple(self.objects))
        if len(self.objects) > MAX_OBJECTS:
            raise ConfigError(f"at most {MAX_OBJECTS} objects supported")
        if self.object_count is None:
            object.__setattr__(self, "object_count", len(self.objects))
        elif self.object_count != len(self.objects):
            raise ConfigError("object_count does not match the objects list")


class _Pose:
    """Affine placement c + s*R(theta)*q of local coords q at one instant."""

    __slots__ = ("cx", "cy", "cos", "sin", "s")

    def __init__(self, cx: float, cy: float, theta: float, s: float):
        self.cx = cx
        self.cy = cy
        self.cos = math.cos(theta)
        self.sin = math.sin(theta)
        self.s = s

    def world_to_local(self, px, py):
        dx = px - self.cx
        dy = py - self.cy
        qx = (self.cos * dx + self.sin * dy) / self.s
        qy = (-self.sin * dx + self.cos * dy) / self.s
        return qx, qy

    def local_to_world(self, qx, qy):
        px = self.cx + self.s * (self.cos * qx - self.sin * qy)
        py = self.cy + self.s * (self.sin * qx + self.cos * qy)
        return px, py


def _pose_at(center: tuple[float, float], angle: float, motion: AffineMotion, t: float) -> _Pose:
    return _Pose(
        center[0] + motion.vx * t,
        center[1] + motion.vy * t,
        angle + motion.omega * t,
        math.exp(motion.scale_rate * t),
    )


def _background_center(config: SceneConfig) -> tuple[float, float]:
    return ((config.width - 1) / 2.0, (config.height - 1) / 2.0)


def _bg_pose(config: SceneConfig, t: float) -> _Pose:
    return _pose_at(_background_center(config), 0.0, config.background_motion, t)


def _check_time(config: SceneConfig, t: float):
    if t < -1e-12 or t > config.duration + 1e-12:
        raise ConfigError(f"t={t} outside [0, {config.duration}]")


def render_scene(config: SceneConfig, t: float) -> np.ndarray:
    """Render the scene at time t as an (H, W) frame in [0, 1]."""
    _check_time(config, t)
    ys, xs = np.mgrid[0 : config.height, 0 : config.width].astype(np.float64)

    cx, cy = _background_center(config)
    pose = _bg_pose(config, t)
    qx, qy = pose.world_to_local(xs, ys)
    frame = sample_texture(config.background, qx + cx, qy + cy)

    for obj in config.objects:
        pose = _pose_at(obj.center, obj.angle, obj.motion, t)
        qx, qy = pose.world_to_local(xs, ys)
        inside = (np.abs(qx) <= obj.size[0] / 2.0) & (np.abs(qy) <= obj.size[1] / 2.0)
        if inside.any():
            frame = np.where(inside, sample_texture(obj.texture, qx, qy), frame)
    return np.clip(frame, 0.0, 1.0)


def _element_speeds(config: SceneConfig, t: float) -> list[float]:
    """Instantaneous speeds of the sample points bounding each element."""
    speeds = []

    def point_speed(pose: _Pose, motion: AffineMotion, qx: float, qy: float) -> float:
        # d/dt [c + s R q] = v + s * (rate*I + omega*J) R q
        rx = pose.s * (pose.cos * qx - pose.sin * qy)
        ry = pose.s * (pose.sin * qx + pose.cos * qy)
        vx = motion.vx + motion.scale_rate * rx - motion.omega * ry
        vy = motion.vy + motion.scale_rate * ry + motion.omega * rx
        return math.hypot(vx, vy)

    cx, cy = _background_center(config)
    bg = _bg_pose(config, t)
    for corner in ((0.0, 0.0), (config.width - 1.0, 0.0), (0.0, config.height - 1.0), (config.width - 1.0, config.height - 1.0)):
        qx, qy = bg.world_to_local(corner[0], corner[1])
        speeds.append(point_speed(bg, config.background_motion, qx, qy))

    for obj in config.objects:
        pose = _pose_at(obj.center, obj.angle, obj.motion, t)
        hx, hy = obj.size[0] / 2.0, obj.size[1] / 2.0
        for qx, qy in ((hx, hy), (-hx, hy), (hx, -hy), (-hx, -hy)):
            speeds.append(point_speed(pose, obj.motion, qx, qy))
    return speeds


def adaptive_timestep(config: SceneConfig, t: float) -> float:
    """Largest step keeping every scene point within one pixel of travel.

    Speeds are evaluated at t and at the tentative step end so smoothly
    accelerating motion stays bounded; the result is clamped to
    [1e-5 s, 0.1 s].
    """
    _check_time(config, t)
    vmax = max(_element_speeds(config, t))
    if vmax <= 0.0:
        return TIMESTEP_CEIL
    dt = 1.0 / vmax
    t_end = min(t + min(dt, TIMESTEP_CEIL), config.duration)
    vmax = max(vmax, max(_element_speeds(config, t_end)))
    dt = 1.0 / vmax
    return min(max(dt, TIMESTEP_FLOOR), TIMESTEP_CEIL)


def ground_truth_flow(config: SceneConfig, t0: float, t1: float) -> FlowField:
    """Exact displacement of the topmost element at each pixel, t0 -> t1."""
    if not t0 < t1:
        raise ConfigError("need t0 < t1")
    _check_time(config, t0)
    _check_time(config, t1)
    ys, xs = np.mgrid[0 : config.height, 0 : config.width].astype(np.float64)

    pose0 = _bg_pose(config, t0)
    pose1 = _bg_pose(config, t1)
    qx, qy = pose0.world_to_local(xs, ys)
    px, py = pose1.local_to_world(qx, qy)
    u = px - xs
    v = py - ys

    for obj in config.objects:
        pose0 = _pose_at(obj.center, obj.angle, obj.motion, t0)
        pose1 = _pose_at(obj.center, obj.angle, obj.motion, t1)
        qx, qy = pose0.world_to_local(xs, ys)
        inside = (np.abs(qx) <= obj.size[0] / 2.0) & (np.abs(qy) <= obj.size[1] / 2.0)
        if inside.any():
            px, py = pose1.local_to_world(qx, qy)
            u = np.where(inside, px - xs, u)
            v = np.where(inside, py - ys, v)
    return FlowField(u, v)


def render_sequence(config: SceneConfig) -> tuple[list[np.ndarray], list[float]]:
    """Render frames at the motion-adaptive rate over [0, duration]."""
    times = [0.0]
    t = 0.0
    while t < config.duration:
        t = min(t + adaptive_timestep(config, t), config.duration)
        times.append(t)
    frames = [render_scene(config, ti) for ti in times]
    return frames, times


def random_scene(
    width: int,
    height: int,
    duration: float,
    object_count: int,
    seed: int,
    max_speed: float = 60.0,
) -> SceneConfig:
    """Seeded scene with a moving background and random moving objects."""
    if not 0 <= object_count <= MAX_OBJECTS:
        raise ConfigError(f"object_count must be in [0, {MAX_OBJECTS}]")
    rng = np.random.default_rng(seed)
    kinds = ("checker", "noise", "bars")

    def rand_motion(scale: float) -> AffineMotion:
        ang = rng.uniform(0, 2 * math.pi)
        speed = rng.uniform(0.2, 1.0) * scale
        return AffineMotion(
            vx=speed * math.cos(ang),
            vy=speed * math.sin(ang),
            omega=float(rng.uniform(-1.0, 1.0)),
            scale_rate=float(rng.uniform(-0.2, 0.2)),
        )

    background = TextureSpec(kind=kinds[int(rng.integers(len(kinds)))], seed=int(rng.integers(2**31)), scale=float(rng.uniform(6, 16)))
    bg_motion = AffineMotion(
        vx=float(rng.uniform(-max_speed, max_speed)),
        vy=float(rng.uniform(-max_speed, max_speed)),
    )
    objects = []
    for _ in range(object_count):
        objects.append(
            SceneObject(
                texture=TextureSpec(kind=kinds[int(rng.integers(len(kinds)))], seed=int(rng.integers(2**31)), scale=float(rng.uniform(3, 10))),
                center=(float(rng.uniform(0.2, 0.8) * width), float(rng.uniform(0.2, 0.8) * height)),
                size=(float(rng.uniform(0.15, 0.4) * width), float(rng.uniform(0.15, 0.4) * height)),
                angle=float(rng.uniform(0, 2 * math.pi)),
                motion=rand_motion(max_speed),
            )
        )
    return SceneConfig(
        width=width,
        height=height,
        duration=duration,
        background=background,
        background_motion=bg_motion,
        objects=tuple(objects),
    )
