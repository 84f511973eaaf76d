"""Unfolded convolutional ISTA with recurrent code/reconstruction units.

The forward pass fuses an event voxel grid and the (warped) previous
frame into a feature stack at half resolution, initializes sparse codes
through a gated recurrent unit with a learnable skip from the previous
(warped) codes, refines them with K unfolded ISTA blocks, and
synthesizes the frame through a gated recurrent reconstruction unit.

`init_weights_from_dict` wires the network so that, with zero initial
codes and states, the block pathway reproduces classical ISTA followed
by dictionary synthesis exactly; this is the bridge used to test the
unfolded implementation against the solver oracle.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, DimensionError, NumericError
from .conv import adjoint_kernel, bilinear_up_kernel, conv2d, identity_kernel, upsample2_tconv
from .ista import DictionaryPair, soft_threshold

logger = logging.getLogger(__name__)

FUSION_KERNEL = 2  # stride-2 fusion taps
THETA_RAW_FLOOR = -40.0  # softplus(-40) ~ 4e-18, effectively zero


def softplus(x):
    return np.logaddexp(0.0, x)


def softplus_inverse(theta: np.ndarray) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    out = np.full(theta.shape, THETA_RAW_FLOOR)
    big = theta > 1e-17
    out[big] = np.log(np.expm1(theta[big]))
    return np.maximum(out, THETA_RAW_FLOOR)


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass(frozen=True)
class ArchConfig:
    """Shape contract for a weight set."""

    bins: int = 5
    feature_channels: int = 16
    code_channels: int = 32
    kernel_size: int = 3
    num_blocks: int = 5

    def __post_init__(self):
        if self.bins < 1 or self.num_blocks < 1:
            raise ConfigError("bins and num_blocks must be >= 1")
        if self.kernel_size % 2 != 1:
            raise ConfigError("kernel_size must be odd")
        if self.feature_channels < 1 or self.code_channels < 1:
            raise ConfigError("channel counts must be >= 1")

    def tensor_shapes(self) -> dict[str, tuple[int, ...]]:
        cx, cz, k, b = self.feature_channels, self.code_channels, self.kernel_size, self.bins
        shapes: dict[str, tuple[int, ...]] = {
            "fusion.w_e": (cx, b, FUSION_KERNEL, FUSION_KERNEL),
            "fusion.w_i": (cx, 1, FUSION_KERNEL, FUSION_KERNEL),
            "fusion.b": (cx,),
            "lstc.w_skip": (cz, cz, k, k),
        }
        for gate in ("f", "i", "c", "o"):
            shapes[f"lstc.w_x{gate}"] = (cz, cx, k, k)
            shapes[f"lstc.w_z{gate}"] = (cz, cz, k, k)
            shapes[f"lstc.b_{gate}"] = (cz,)
        for j in range(self.num_blocks):
            shapes[f"blocks.{j}.analysis"] = (cx, cz, k, k)
            shapes[f"blocks.{j}.backproj"] = (cz, cx, k, k)
            shapes[f"blocks.{j}.theta_raw"] = (cz,)
        for name in ("w_g", "u_g", "w_c", "u_c"):
            shapes[f"lsrc.{name}"] = (cz, cz, k, k)
        shapes["lsrc.b_g"] = (cz,)
        shapes["lsrc.b_c"] = (cz,)
        shapes["lsrc.d_i"] = (1, cz, 4, 4)
        shapes["lsrc.d_a"] = (1, cz, 4, 4)
        shapes["lsrc.b_i"] = (1,)
        return shapes


@dataclass
class CistaWeights:
    arch: ArchConfig
    tensors: dict[str, np.ndarray]

    def __post_init__(self):
        expected = self.arch.tensor_shapes()
        missing = sorted(set(expected) - set(self.tensors))
        if missing:
            raise ConfigError(f"missing weight tensors: {missing[:4]}{'...' if len(missing) > 4 else ''}")
        for name, shape in expected.items():
            t = np.asarray(self.tensors[name], dtype=np.float64)
            if t.shape != shape:
                raise DimensionError(f"tensor {name} has shape {t.shape}, expected {shape}")
            if not np.isfinite(t).all():
                raise ConfigError(f"tensor {name} contains non-finite values")
            self.tensors[name] = t
        extra = sorted(set(self.tensors) - set(expected))
        if extra:
            logger.warning("ignoring %d unknown weight tensors: %s", len(extra), extra[:4])
            for name in extra:
                del self.tensors[name]

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tensors[name]

    def theta(self, block: int) -> np.ndarray:
        return softplus(self.tensors[f"blocks.{block}.theta_raw"])


@dataclass(frozen=True)
class CistaState:
    """Carry-over between reconstructions: codes plus both recurrent states."""

    z: np.ndarray
    a: np.ndarray
    c: np.ndarray

    @classmethod
    def zeros(cls, arch: ArchConfig, height: int, width: int) -> "CistaState":
        if height % 2 or width % 2:
            raise DimensionError("frame dimensions must be even")
        shape = (arch.code_channels, height // 2, width // 2)
        return cls(np.zeros(shape), np.zeros(shape), np.zeros(shape))


def _check_finite(name: str, arr: np.ndarray):
    if not np.isfinite(arr).all():
        raise NumericError(f"non-finite activations in {name}")


def _as_voxel_array(events) -> np.ndarray:
    return np.asarray(getattr(events, "data", events), dtype=np.float64)


def fuse_inputs(events, frame: np.ndarray, weights: CistaWeights) -> np.ndarray:
    """Stride-2 fusion of the voxel grid and intensity frame."""
    e = _as_voxel_array(events)
    frame = np.asarray(frame, dtype=np.float64)
    arch = weights.arch
    if e.ndim != 3 or e.shape[0] != arch.bins:
        raise DimensionError(f"voxel grid must be ({arch.bins}, H, W)")
    if frame.shape != e.shape[1:]:
        raise DimensionError("frame and voxel grid disagree on spatial size")
    if frame.shape[0] % 2 or frame.shape[1] % 2:
        raise DimensionError("frame dimensions must be even")
    x = conv2d(e, weights["fusion.w_e"], stride=2, pad=0)
    x = x + conv2d(frame[None], weights["fusion.w_i"], stride=2, pad=0)
    x = x + weights["fusion.b"][:, None, None]
    _check_finite("fusion", x)
    return x


def _lstc(x, z_prev, c, weights: CistaWeights):
    def gate(name):
        return (
            conv2d(x, weights[f"lstc.w_x{name}"])
            + conv2d(z_prev, weights[f"lstc.w_z{name}"])
            + weights[f"lstc.b_{name}"][:, None, None]
        )

    f = _sigmoid(gate("f"))
    i = _sigmoid(gate("i"))
    cand = np.tanh(gate("c"))
    c_new = f * c + i * cand
    o = _sigmoid(gate("o"))
    z0 = o * np.tanh(c_new) + conv2d(z_prev, weights["lstc.w_skip"])
    _check_finite("lstc", z0)
    return z0, c_new


def _ista_blocks(x, z, weights: CistaWeights):
    for j in range(weights.arch.num_blocks):
        r = x - conv2d(z, weights[f"blocks.{j}.analysis"])
        z = soft_threshold(z + conv2d(r, weights[f"blocks.{j}.backproj"]), weights.theta(j))
        _check_finite(f"block {j}", z)
    return z


def _lsrc(z, a, weights: CistaWeights):
    g = _sigmoid(
        conv2d(z, weights["lsrc.w_g"]) + conv2d(a, weights["lsrc.u_g"])
        + weights["lsrc.b_g"][:, None, None]
    )
    cand = np.tanh(
        conv2d(z, weights["lsrc.w_c"]) + conv2d(a, weights["lsrc.u_c"])
        + weights["lsrc.b_c"][:, None, None]
    )
    a_new = g * a + (1.0 - g) * cand
    pre = (
        upsample2_tconv(z, weights["lsrc.d_i"])[0]
        + upsample2_tconv(a_new, weights["lsrc.d_a"])[0]
        + weights["lsrc.b_i"][0]
    )
    _check_finite("lsrc", pre)
    return pre, a_new


def cista_forward(
    events,
    frame_warped: np.ndarray,
    codes_warped: np.ndarray,
    a: np.ndarray,
    c: np.ndarray,
    weights: CistaWeights,
) -> tuple[np.ndarray, CistaState]:
    """One reconstruction: (events, warped frame, warped codes, states) -> frame.

    Returns the [0, 1]-clamped frame and the new state (codes at half the
    frame resolution plus both recurrent states).
    """
    x = fuse_inputs(events, frame_warped, weights)
    code_shape = (weights.arch.code_channels, x.shape[1], x.shape[2])
    for name, arr in (("codes", codes_warped), ("state a", a), ("state c", c)):
        if arr.shape != code_shape:
            raise DimensionError(f"{name} must have shape {code_shape}, got {arr.shape}")
    z0, c_new = _lstc(x, codes_warped, c, weights)
    z = _ista_blocks(x, z0, weights)
    pre, a_new = _lsrc(z, a, weights)
    return np.clip(pre, 0.0, 1.0), CistaState(z=z, a=a_new, c=c_new)


def _zero_tensors(arch: ArchConfig) -> dict[str, np.ndarray]:
    return {name: np.zeros(shape) for name, shape in arch.tensor_shapes().items()}


def default_fusion(arch: ArchConfig, event_gain: float = 1.0):
    """Box-downsample fusion: frame into channel 0, averaged bins into channel 1.

    With a single feature channel both shares land in channel 0.
    """
    w_i = np.zeros((arch.feature_channels, 1, FUSION_KERNEL, FUSION_KERNEL))
    w_i[0] = 0.25
    w_e = np.zeros((arch.feature_channels, arch.bins, FUSION_KERNEL, FUSION_KERNEL))
    ch = 1 if arch.feature_channels > 1 else 0
    w_e[ch] = 0.25 * event_gain / arch.bins
    return w_e, w_i, np.zeros(arch.feature_channels)


def init_weights_from_dict(
    dictionary: DictionaryPair,
    lam: float,
    step_constant: float,
    iterations: int,
    bins: int = 5,
    fusion: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None,
) -> CistaWeights:
    """Weights whose forward pass is exactly ISTA plus dictionary synthesis.

    Blocks implement z + (1/L) D_X^T (x - D_X z) with threshold lam/L;
    the code-init unit passes the previous codes straight through (zero
    initial state gives the solver's zero start) and the reconstruction
    unit is pure synthesis with an inert state.
    """
    if step_constant <= 0:
        raise ConfigError("step_constant must be > 0")
    if lam < 0:
        raise ConfigError("lam must be >= 0")
    arch = ArchConfig(
        bins=bins,
        feature_channels=dictionary.feature_channels,
        code_channels=dictionary.code_channels,
        kernel_size=dictionary.d_x.shape[2],
        num_blocks=iterations,
    )
    t = _zero_tensors(arch)
    if fusion is None:
        fusion = default_fusion(arch)
    t["fusion.w_e"], t["fusion.w_i"], t["fusion.b"] = (
        np.asarray(fusion[0], dtype=np.float64),
        np.asarray(fusion[1], dtype=np.float64),
        np.asarray(fusion[2], dtype=np.float64),
    )
    t["lstc.w_skip"] = identity_kernel(arch.code_channels, arch.kernel_size)
    theta_raw = softplus_inverse(np.full(arch.code_channels, lam / step_constant))
    back = adjoint_kernel(dictionary.d_x) / step_constant
    for j in range(iterations):
        t[f"blocks.{j}.analysis"] = dictionary.d_x.copy()
        t[f"blocks.{j}.backproj"] = back.copy()
        t[f"blocks.{j}.theta_raw"] = theta_raw.copy()
    t["lsrc.d_i"] = dictionary.d_i.copy()
    return CistaWeights(arch, t)


def dictionary_from_weights(weights: CistaWeights) -> DictionaryPair:
    """Recover the (analysis, synthesis) pair from oracle-bridge weights."""
    return DictionaryPair(weights["blocks.0.analysis"], weights["lsrc.d_i"])


def random_weights(arch: ArchConfig, seed: int = 0, scale: float = 0.1) -> CistaWeights:
    """Seeded Gaussian weights for shape and property tests."""
    rng = np.random.default_rng(seed)
    t = {}
    for name, shape in arch.tensor_shapes().items():
        t[name] = scale * rng.standard_normal(shape)
    return CistaWeights(arch, t)


def make_integrator_weights(
    bins: int = 5,
    threshold_mean: float = 0.3,
    lam: float = 1e-4,
    iterations: int = 5,
    event_gain: float | None = None,
    event_fraction: float = 0.3,
    tonemap_floor: float = 0.05,
) -> tuple[CistaWeights, DictionaryPair]:
    """Physically motivated oracle-bridge weights for desk-scale pipelines.

    The reconstruction tracks normalized log-brightness (the axis events
    measure; see eventsim.tonemap_log), where every event is worth
    threshold_mean log units exactly.  The fused feature is a 2x box
    downsample of the warped frame plus bin-summed event mass scaled by
    `event_fraction` of that per-event worth: a deliberate under-gain,
    so the warped frame carries the structure and events act as a
    correction.  The analysis dictionary is a 3x3 blur (the unfolded
    solver runs a few deconvolution steps that reuse warm-started
    codes); synthesis upsamples bilinearly.
    """
    from ..eventsim.emitter import lin_log

    blur = np.array([[1.0, 2.0, 1.0], [2.0, 4.0, 2.0], [1.0, 2.0, 1.0]]) / 16.0
    d_x = blur[None, None]
    d_i = bilinear_up_kernel(1, 1)
    dictionary = DictionaryPair(d_x, d_i)
    if event_gain is None:
        log_span = float(lin_log(np.array(1.0)) - lin_log(np.array(tonemap_floor)))
        event_gain = event_fraction * threshold_mean / log_span
    w_i = np.full((1, 1, FUSION_KERNEL, FUSION_KERNEL), 0.25)
    w_e = np.full((1, bins, FUSION_KERNEL, FUSION_KERNEL), 0.25 * event_gain)
    weights = init_weights_from_dict(
        dictionary,
        lam=lam,
        step_constant=1.0,
        iterations=iterations,
        bins=bins,
        fusion=(w_e, w_i, np.zeros(1)),
    )
    return weights, dictionary
