from .cista import (
    ArchConfig,
    CistaState,
    CistaWeights,
    cista_forward,
    default_fusion,
    dictionary_from_weights,
    init_weights_from_dict,
    make_integrator_weights,
    random_weights,
    softplus,
    softplus_inverse,
)
from .conv import (
    adjoint_kernel,
    bilinear_up_kernel,
    conv2d,
    conv2d_adjoint,
    identity_kernel,
    upsample2_tconv,
)
from .ista import (
    DictionaryPair,
    estimate_lipschitz,
    ista_solve,
    lasso_objective,
    random_dictionary,
    soft_threshold,
)
from .jvp import cista_forward_smooth, cista_forward_smooth_jvp, smooth_soft_threshold


def save_weights(weights: CistaWeights, path) -> None:
    """Write a weight set to the named-tensor container format."""
    from ..pipeline.formats import write_weights

    write_weights(path, weights)


def load_weights(path) -> CistaWeights:
    """Read a weight set from the named-tensor container format."""
    from ..pipeline.formats import read_weights

    return read_weights(path)


__all__ = [
    "ArchConfig",
    "CistaState",
    "CistaWeights",
    "DictionaryPair",
    "adjoint_kernel",
    "bilinear_up_kernel",
    "cista_forward",
    "cista_forward_smooth",
    "cista_forward_smooth_jvp",
    "conv2d",
    "conv2d_adjoint",
    "default_fusion",
    "dictionary_from_weights",
    "estimate_lipschitz",
    "identity_kernel",
    "init_weights_from_dict",
    "ista_solve",
    "lasso_objective",
    "load_weights",
    "make_integrator_weights",
    "random_dictionary",
    "random_weights",
    "save_weights",
    "smooth_soft_threshold",
    "soft_threshold",
    "softplus",
    "softplus_inverse",
    "upsample2_tconv",
]
