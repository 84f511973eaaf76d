from .formats import (
    normalize_frame,
    read_events,
    read_flo,
    read_image,
    read_manifest,
    read_tensors,
    read_weights,
    write_events,
    write_flo,
    write_image,
    write_manifest,
    write_tensors,
    write_weights,
)
from .providers import FileFlowProvider, SceneFlowProvider, ZeroFlowProvider, make_provider
from .run import RunConfig, run_reconstruction

__all__ = [
    "FileFlowProvider",
    "RunConfig",
    "SceneFlowProvider",
    "ZeroFlowProvider",
    "make_provider",
    "normalize_frame",
    "read_events",
    "read_flo",
    "read_image",
    "read_manifest",
    "read_tensors",
    "read_weights",
    "run_reconstruction",
    "write_events",
    "write_flo",
    "write_image",
    "write_manifest",
    "write_tensors",
    "write_weights",
]
