"""evrec: event-camera video reconstruction with motion compensation.

Simulation of DVS event streams from affine scenes, voxel encodings,
forward warping of frames / sparse codes / events, an unfolded
convolutional-ISTA reconstructor with a classical-ISTA oracle, the full
metric and loss suite, and a recursive reconstruction pipeline with
pluggable flow providers.
"""

from ._kernels import BACKEND
from .encode import EventGroup, VoxelGrid, build_voxel_grid, event_image, slice_by_count
from .events import Event, EventStream
from .warp import (
    FlowField,
    downsample_flow,
    forward_warp_codes,
    forward_warp_frame,
    fwl,
    image_variance,
    warp_events,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Event",
    "EventGroup",
    "EventStream",
    "FlowField",
    "VoxelGrid",
    "build_voxel_grid",
    "downsample_flow",
    "event_image",
    "forward_warp_codes",
    "forward_warp_frame",
    "fwl",
    "image_variance",
    "slice_by_count",
    "warp_events",
    "__version__",
]
