"""Experiment configuration and the catalog of convex test functions."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, fields, replace
from typing import Any

import numpy as np

from ..errors import ConfigError
from ..linalg import LinearMap, SubspaceSpec
from ..rand_sources import DistSpec
from ..tensor_core import norm_product


class Experiment(str, enum.Enum):
    NORM_TAIL = "norm-tail"
    MAXIMAL = "maximal"
    CONVEX_CONC = "convex-conc"
    EUCLIDEAN_CONC = "euclidean-conc"
    VARIANCE = "variance"
    DISTANCE = "distance"
    CONDITION = "condition"
    MGF_CHAOS = "mgf-chaos"
    MARTINGALE_CHECK = "martingale-check"
    MULTIPLIERS = "multipliers"

    @property
    def is_tail(self) -> bool:
        return self in TAIL_EXPERIMENTS


TAIL_EXPERIMENTS = frozenset(
    {Experiment.NORM_TAIL, Experiment.MAXIMAL, Experiment.CONVEX_CONC, Experiment.EUCLIDEAN_CONC, Experiment.DISTANCE}
)

FUNCTIONS = ("norm", "max-functionals", "operator", "distance")
OPERATORS = ("gaussian", "projection", "identity")
SUBSPACES = ("gaussian", "simple")
MATRICES = ("uniform-eigs", "identity")

# Auxiliary stream tags (see rand_sources.aux_generator).
AUX_OPERATOR = 1
AUX_SUBSPACE = 2
AUX_MATRIX = 3
AUX_FUNCTIONALS = 4
AUX_MARTINGALE = 5


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one experiment bit for bit.

    ``grid`` holds t values (tail experiments), u values (``maximal``) or
    lambda values (``mgf-chaos``). ``workers`` only affects wall-clock time
    and is left out of :meth:`echo`.
    """

    experiment: Experiment
    n: int = 10
    d: int = 2
    m: int | None = None
    k: int | None = None
    epsilon: float | None = None
    dist: DistSpec = field(default_factory=DistSpec)
    trials: int = 10_000
    grid: tuple[float, ...] = ()
    master_seed: int = 0
    workers: int = 1
    function: str = "norm"
    operator: str = "gaussian"
    subspace: str = "gaussian"
    matrix: str = "uniform-eigs"
    functionals: int = 8
    c: float = 0.1
    C: float = 2.0
    lambda0: float | None = None
    M: float | None = None
    space_sizes: tuple[int, ...] = (3, 3, 3)
    value_bound: float = 2.0
    instances: int = 100

    def __post_init__(self):
        try:
            object.__setattr__(self, "experiment", Experiment(self.experiment))
        except ValueError:
            raise ConfigError(f"unknown experiment {self.experiment!r}") from None
        object.__setattr__(self, "dist", DistSpec.parse(self.dist))
        object.__setattr__(self, "grid", tuple(float(g) for g in self.grid))
        object.__setattr__(self, "space_sizes", tuple(int(s) for s in self.space_sizes))
        for name in ("n", "d", "trials", "workers", "functionals", "instances"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        for name in ("m", "k"):
            value = getattr(self, name)
            if value is not None and (int(value) != value or value < 0):
                raise ConfigError(f"{name} must be a nonnegative integer, got {value!r}")
        if self.epsilon is not None and not 0.0 < self.epsilon < 1.0:
            raise ConfigError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if not (self.c > 0 and self.C > 0):
            raise ConfigError("constants c and C must be positive")
        if self.function not in FUNCTIONS:
            raise ConfigError(f"function must be one of {FUNCTIONS}, got {self.function!r}")
        if self.operator not in OPERATORS:
            raise ConfigError(f"operator must be one of {OPERATORS}, got {self.operator!r}")
        if self.subspace not in SUBSPACES:
            raise ConfigError(f"subspace must be one of {SUBSPACES}, got {self.subspace!r}")
        if self.matrix not in MATRICES:
            raise ConfigError(f"matrix must be one of {MATRICES}, got {self.matrix!r}")
        self._check_grid()

    def _check_grid(self):
        g = np.asarray(self.grid)
        if g.size and not np.all(np.isfinite(g)):
            raise ConfigError("grid values must be finite")
        if g.size > 1 and np.any(np.diff(g) <= 0):
            raise ConfigError("grid must be strictly increasing")
        if self.experiment is not Experiment.MGF_CHAOS and g.size and g[0] < 0:
            raise ConfigError("grid must be nonnegative")
        if self.experiment.is_tail and not g.size:
            raise ConfigError(f"{self.experiment.value} needs a nonempty grid")

    @property
    def ambient_dim(self) -> int:
        return int(self.n) ** int(self.d)

    def echo(self) -> dict[str, Any]:
        """Config as plain data, without the worker count."""
        out = {}
        for f in fields(self):
            if f.name == "workers":
                continue
            value = getattr(self, f.name)
            if isinstance(value, enum.Enum):
                value = value.value
            elif isinstance(value, DistSpec):
                value = value.to_config()
            elif isinstance(value, tuple):
                value = list(value)
            out[f.name] = value
        return out

    def with_(self, **changes) -> "ExperimentConfig":
        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class TestFunction:
    """A convex, 1-Lipschitz function of a simple tensor.

    Build with one of the class methods; evaluate on factor blocks
    shaped ``(T, d, n)``.
    """

    __test__ = False  # not a pytest class

    kind: str
    operator: LinearMap | None = None
    functionals: np.ndarray | None = None  # (r, d, n), unit factors
    subspace: SubspaceSpec | None = None

    @classmethod
    def euclidean_norm(cls) -> "TestFunction":
        return cls("norm")

    @classmethod
    def operator_norm(cls, A: LinearMap) -> "TestFunction":
        if A.op_norm <= 0:
            raise ConfigError("operator norm test function needs a nonzero operator")
        return cls("operator", operator=A)

    @classmethod
    def max_of_functionals(cls, tensors: np.ndarray) -> "TestFunction":
        U = np.asarray(tensors, dtype=float)
        U = U / np.linalg.norm(U, axis=-1, keepdims=True)
        return cls("max-functionals", functionals=U)

    @classmethod
    def distance_to(cls, L: SubspaceSpec) -> "TestFunction":
        return cls("distance", subspace=L)

    @property
    def lip(self) -> float:
        return 1.0

    def __call__(self, factors: np.ndarray) -> np.ndarray:
        if self.kind == "norm":
            return norm_product(factors)
        if self.kind == "operator":
            return self.operator.norm_of_image(factors) / self.operator.op_norm
        if self.kind == "max-functionals":
            inner = np.prod(np.einsum("tkn,rkn->trk", factors, self.functionals), axis=-1)
            return inner.max(axis=1)
        return self.subspace.distances(factors)


def config_from_mapping(data: dict[str, Any]) -> ExperimentConfig:
    """Build a config from flat key-value data (config files, parsed flags)."""
    known = {f.name for f in fields(ExperimentConfig)}
    aliases = {"seed": "master_seed", "N": "trials"}
    clean = {}
    for key, value in data.items():
        key = aliases.get(key, key.replace("-", "_"))
        if key not in known:
            raise ConfigError(f"unknown configuration key {key!r}")
        clean[key] = value
    if "experiment" not in clean:
        raise ConfigError("configuration needs an experiment")
    return ExperimentConfig(**clean)

