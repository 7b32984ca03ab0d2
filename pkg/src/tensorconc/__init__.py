"""Simple random tensors: concentration bounds, exact oracles and seeded
Monte Carlo experiments."""
from ._version import tool_version
from .bounds import BoundParams, multipliers
from .errors import ConfigError, DivergentMGFError, InsufficientDataError, NumericalError, TensorConcError
from .linalg import (
    GramEnsemble,
    LinearMap,
    SubspaceSpec,
    build_gram,
    dist_to_subspace,
    leave_one_out_distance,
    leave_one_out_distances,
    sigma_min_from_gram,
    sigma_min_lower_bound_loo,
)
from .rand_sources import DistKind, DistSpec, SeedSpec, sample_factors, sample_vector
from .tensor_core import SimpleTensor, densify, norm_product, tensor_inner, tensor_norm

__version__ = tool_version()

__all__ = [
    "BoundParams",
    "ConfigError",
    "DistKind",
    "DistSpec",
    "DivergentMGFError",
    "GramEnsemble",
    "InsufficientDataError",
    "LinearMap",
    "NumericalError",
    "SeedSpec",
    "SimpleTensor",
    "SubspaceSpec",
    "TensorConcError",
    "build_gram",
    "densify",
    "dist_to_subspace",
    "leave_one_out_distance",
    "leave_one_out_distances",
    "multipliers",
    "norm_product",
    "sample_factors",
    "sample_vector",
    "sigma_min_from_gram",
    "sigma_min_lower_bound_loo",
    "tensor_inner",
    "tensor_norm",
]
