"""Hot-kernel backend selection.

The compiled extension is preferred when importable; set
EVREC_PURE_PYTHON=1 to force the NumPy fallback.  Both backends are
bit-for-bit equivalent (enforced by tests), so the switch only affects
speed.
"""

import os

from . import _numpy

if os.environ.get("EVREC_PURE_PYTHON"):
    _impl = _numpy
else:
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _numpy

BACKEND = _impl.BACKEND
splat_bilinear = _impl.splat_bilinear
voxel_deposit = _impl.voxel_deposit
crossing_candidates = _impl.crossing_candidates
refractory_keep = _impl.refractory_keep

__all__ = [
    "BACKEND",
    "splat_bilinear",
    "voxel_deposit",
    "crossing_candidates",
    "refractory_keep",
]
