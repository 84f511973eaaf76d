"""TOML/JSON configuration files for scenes, sensor params, and runs."""

from __future__ import annotations

import json
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from ..errors import ConfigError, InputFormatError
from ..eventsim.emitter import SimParams
from ..eventsim.scene import AffineMotion, SceneConfig, SceneObject
from ..eventsim.textures import TextureSpec
from .run import RunConfig


def load_config_file(path) -> dict:
    path = Path(path)
    try:
        if path.suffix.lower() == ".json":
            with open(path) as fh:
                return json.load(fh)
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise InputFormatError(f"{path}: cannot parse config: {exc}") from exc


def texture_from_dict(d: dict) -> TextureSpec:
    return TextureSpec(
        kind=d.get("texture", d.get("kind", "checker")),
        seed=int(d.get("seed", 0)),
        scale=float(d.get("scale", 8.0)),
        path=d.get("path") or None,
    )


def motion_from_dict(d: dict | None) -> AffineMotion:
    d = d or {}
    return AffineMotion(
        vx=float(d.get("vx", 0.0)),
        vy=float(d.get("vy", 0.0)),
        omega=float(d.get("omega", 0.0)),
        scale_rate=float(d.get("scale_rate", 0.0)),
    )


def scene_from_dict(d: dict) -> SceneConfig:
    try:
        bg = d.get("background", {"texture": "checker"})
        objects = []
        for od in d.get("objects", []):
            objects.append(
                SceneObject(
                    texture=texture_from_dict(od),
                    center=tuple(float(v) for v in od["center"]),
                    size=tuple(float(v) for v in od["size"]),
                    angle=float(od.get("angle", 0.0)),
                    motion=motion_from_dict(od),
                )
            )
        return SceneConfig(
            width=int(d["width"]),
            height=int(d["height"]),
            duration=float(d["duration"]),
            background=texture_from_dict(bg),
            background_motion=motion_from_dict(bg.get("motion")),
            objects=tuple(objects),
            object_count=d.get("object_count"),
        )
    except KeyError as exc:
        raise ConfigError(f"scene config missing required key {exc}") from exc


def sim_params_from_dict(d: dict, seed: int | None = None) -> SimParams:
    return SimParams(
        threshold_mean=float(d.get("threshold_mean", 0.3)),
        threshold_std=float(d.get("threshold_std", 0.03)),
        neg_pos_ratio_mean=float(d.get("neg_pos_ratio_mean", 1.0)),
        neg_pos_ratio_std=float(d.get("neg_pos_ratio_std", 0.1)),
        cutoff_hz=float(d.get("cutoff_hz", 0.0)),
        refractory_s=float(d.get("refractory_s", 1e-3)),
        leak_rate_hz=float(d.get("leak_rate_hz", 0.1)),
        shot_noise_hz=float(d.get("shot_noise_hz", 1.0)),
        seed=int(d.get("seed", 0)) if seed is None else seed,
    )


def run_config_from_dict(d: dict, **overrides) -> RunConfig:
    merged = {
        "bins": int(d.get("bins", 5)),
        "n_events": int(d.get("n_events", 15000)),
        "warp_mode": d.get("warp_mode", "frame+codes"),
        "emit_initial": bool(d.get("emit_initial", False)),
        "normalize_voxels": bool(d.get("normalize_voxels", False)),
        "timings": bool(d.get("timings", False)),
        "seed": int(d.get("seed", 0)),
    }
    merged.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**merged)


def load_scene(path) -> SceneConfig:
    data = load_config_file(path)
    return scene_from_dict(data.get("scene", data))
