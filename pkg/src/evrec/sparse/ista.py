"""Classical convolutional ISTA: the oracle the unfolded network is checked against.

Solves min_z 0.5*||x - D_X z||^2 + lam*||z||_1 where D_X is a same-padded
convolutional dictionary mapping codes (Cz, h, w) to features (Cx, h, w).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, DimensionError, DivergenceError
from .conv import conv2d, conv2d_adjoint, upsample2_tconv

POWER_ITERS = 50


@dataclass(frozen=True)
class DictionaryPair:
    """Analysis dictionary d_x (codes -> features) and synthesis d_i (codes -> image).

    d_x: (Cx, Cz, k, k) same-padded stride-1 filters.
    d_i: (1, Cz, 4, 4) stride-2 transpose filters producing the 1xHxW image
    from codes at half resolution.
    """

    d_x: np.ndarray
    d_i: np.ndarray

    def __post_init__(self):
        if self.d_x.ndim != 4 or self.d_i.ndim != 4:
            raise DimensionError("dictionaries must be 4-d filter banks")
        if self.d_i.shape[0] != 1 or self.d_i.shape[2:] != (4, 4):
            raise DimensionError("d_i must be (1, Cz, 4, 4)")
        if self.d_x.shape[1] != self.d_i.shape[1]:
            raise DimensionError("d_x and d_i disagree on code channels")
        if not (np.isfinite(self.d_x).all() and np.isfinite(self.d_i).all()):
            raise ConfigError("dictionary weights must be finite")

    @property
    def code_channels(self) -> int:
        return self.d_x.shape[1]

    @property
    def feature_channels(self) -> int:
        return self.d_x.shape[0]

    def synthesize(self, z: np.ndarray) -> np.ndarray:
        """Image from codes: stride-2 transpose conv with d_i."""
        return upsample2_tconv(z, self.d_i)[0]


def soft_threshold(v: np.ndarray, theta) -> np.ndarray:
    """sign(v) * max(|v| - theta, 0); theta scalar or per-channel (C,)."""
    theta = np.asarray(theta, dtype=np.float64)
    if np.any(theta < 0):
        raise ConfigError("threshold must be nonnegative")
    v = np.asarray(v, dtype=np.float64)
    if theta.ndim == 1:
        if v.ndim != 3 or v.shape[0] != theta.shape[0]:
            raise DimensionError("per-channel threshold needs v as (C, h, w)")
        theta = theta[:, None, None]
    return np.sign(v) * np.maximum(np.abs(v) - theta, 0.0)


def estimate_lipschitz(
    dictionary: DictionaryPair,
    shape: tuple[int, int],
    iters: int = POWER_ITERS,
    seed: int = 0,
) -> float:
    """Power-iteration estimate of ||D_X^T D_X|| on codes of the given shape."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((dictionary.code_channels, *shape))
    v /= np.linalg.norm(v.ravel())
    lam = 1.0
    for _ in range(iters):
        w = conv2d_adjoint(conv2d(v, dictionary.d_x), dictionary.d_x)
        nw = np.linalg.norm(w.ravel())
        if nw == 0.0:
            return 0.0
        lam = nw
        v = w / nw
    return float(lam)


def lasso_objective(x: np.ndarray, dictionary: DictionaryPair, z: np.ndarray, lam: float) -> float:
    r = x - conv2d(z, dictionary.d_x)
    return float(0.5 * np.sum(r * r) + lam * np.sum(np.abs(z)))


def ista_solve(
    x: np.ndarray,
    dictionary: DictionaryPair,
    lam: float,
    step_constant: float | None = None,
    iterations: int = 10,
    return_objectives: bool = False,
):
    """Run `iterations` ISTA steps from z = 0.

    step_constant is the Lipschitz constant L; when omitted it is set to
    1.01x the power-iteration estimate of the dictionary Gram norm.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3 or x.shape[0] != dictionary.feature_channels:
        raise DimensionError("x must be (Cx, h, w) matching the dictionary")
    if lam < 0:
        raise ConfigError("lam must be >= 0")
    if iterations < 1:
        raise ConfigError("iterations must be >= 1")
    if step_constant is None:
        step_constant = 1.01 * estimate_lipschitz(dictionary, x.shape[1:])
        if step_constant <= 0.0:
            step_constant = 1.0
    if step_constant <= 0.0:
        raise ConfigError("step_constant must be > 0")

    inv_l = 1.0 / step_constant
    theta = lam / step_constant
    z = np.zeros((dictionary.code_channels, x.shape[1], x.shape[2]))
    objectives = [lasso_objective(x, dictionary, z, lam)] if return_objectives else None
    for k in range(iterations):
        r = x - conv2d(z, dictionary.d_x)
        z = soft_threshold(z + inv_l * conv2d_adjoint(r, dictionary.d_x), theta)
        if not np.isfinite(z).all():
            raise DivergenceError(f"ISTA diverged at iteration {k + 1}", iteration=k + 1)
        if return_objectives:
            objectives.append(lasso_objective(x, dictionary, z, lam))
    if return_objectives:
        return z, objectives
    return z


def random_dictionary(
    feature_channels: int,
    code_channels: int,
    kernel_size: int = 3,
    seed: int = 0,
    scale: float = 0.5,
) -> DictionaryPair:
    """Seeded Gaussian dictionary pair for tests and experiments."""
    rng = np.random.default_rng(seed)
    d_x = scale * rng.standard_normal((feature_channels, code_channels, kernel_size, kernel_size))
    d_i = scale * rng.standard_normal((1, code_channels, 4, 4))
    return DictionaryPair(d_x, d_i)
