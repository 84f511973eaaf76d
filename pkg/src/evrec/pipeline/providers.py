"""Pluggable optical-flow sources for the reconstruction loop.

These stand in for a learned flow estimator: exact flow derived from a
known scene, all-zero flow (no motion compensation), or externally
supplied .flo files, one per reconstruction step.
"""

from __future__ import annotations

from pathlib import Path

from ..errors import ConfigError, InputFormatError
from ..eventsim.scene import SceneConfig, ground_truth_flow
from ..warp import FlowField
from . import formats

FLOW_FILE_PATTERN = "flow_{:06d}.flo"


class ZeroFlowProvider:
    kind = "zero"

    def flow_for_step(self, index: int, t0: float, t1: float, shape: tuple[int, int]) -> FlowField:
        return FlowField.zero(*shape)

    def describe(self) -> dict:
        return {"kind": self.kind}


class SceneFlowProvider:
    """Exact flow from the affine scene parameters over each step window."""

    kind = "ground_truth"

    def __init__(self, scene: SceneConfig):
        self.scene = scene

    def flow_for_step(self, index: int, t0: float, t1: float, shape: tuple[int, int]) -> FlowField:
        if shape != (self.scene.height, self.scene.width):
            raise ConfigError("scene geometry does not match the sensor")
        if not t1 > t0:
            return FlowField.zero(*shape)
        return ground_truth_flow(self.scene, t0, t1)

    def describe(self) -> dict:
        return {"kind": self.kind, "scene": f"{self.scene.width}x{self.scene.height}"}


class FileFlowProvider:
    """Reads one .flo per reconstruction step from a directory."""

    kind = "external_files"

    def __init__(self, directory):
        self.directory = Path(directory)
        if not self.directory.is_dir():
            raise InputFormatError(f"flow directory {self.directory} does not exist")

    def flow_for_step(self, index: int, t0: float, t1: float, shape: tuple[int, int]) -> FlowField:
        path = self.directory / FLOW_FILE_PATTERN.format(index)
        if not path.exists():
            raise InputFormatError(f"flow provider exhausted: missing {path} for step {index}")
        flow = formats.read_flo(path)
        if (flow.height, flow.width) != shape:
            raise InputFormatError(f"{path}: flow is {flow.height}x{flow.width}, sensor needs {shape}")
        return flow

    def describe(self) -> dict:
        return {"kind": self.kind, "directory": str(self.directory)}


def make_provider(kind: str, scene: SceneConfig | None = None, directory=None):
    if kind == "zero":
        return ZeroFlowProvider()
    if kind in ("ground_truth", "gt"):
        if scene is None:
            raise ConfigError("ground-truth flow provider needs a scene definition")
        return SceneFlowProvider(scene)
    if kind in ("external_files", "external"):
        if directory is None:
            raise ConfigError("external flow provider needs a directory")
        return FileFlowProvider(directory)
    raise ConfigError(f"unknown flow provider kind {kind!r}")
