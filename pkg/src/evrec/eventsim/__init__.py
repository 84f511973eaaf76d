from .emitter import MIN_THRESHOLD, SimParams, emit_events, lin_log, sample_thresholds
from .scene import (
    AffineMotion,
    SceneConfig,
    SceneObject,
    adaptive_timestep,
    ground_truth_flow,
    random_scene,
    render_scene,
    render_sequence,
)
from .textures import TextureSpec, sample_texture

__all__ = [
    "AffineMotion",
    "MIN_THRESHOLD",
    "SceneConfig",
    "SceneObject",
    "SimParams",
    "TextureSpec",
    "adaptive_timestep",
    "emit_events",
    "ground_truth_flow",
    "lin_log",
    "random_scene",
    "render_scene",
    "render_sequence",
    "sample_texture",
    "sample_thresholds",
]
