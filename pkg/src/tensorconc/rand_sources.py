"""Seeded sampling of mean-zero, unit-variance subgaussian coordinates.

Every random draw in the package goes through :func:`sample_vector`, whose
stream is a pure function of ``(master_seed, trial_index, mode_index)``.
Results therefore do not depend on how trials are split across workers.
"""
from __future__ import annotations

import enum
import functools
import math
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy import integrate, optimize

from .errors import ConfigError

_U32 = 0xFFFFFFFF
_U64 = 0xFFFFFFFFFFFFFFFF

# Mode offset of the disjoint pilot stream used for centering estimates.
PILOT_MODE_OFFSET = 2**31
# Trial indices at or above this value are reserved for auxiliary draws
# (random operators, subspaces, matrices) that are fixed across trials.
AUX_TRIAL_BASE = 2**63


class DistKind(str, enum.Enum):
    NORMAL = "normal"
    RADEMACHER = "rademacher"
    UNIFORM = "uniform"
    BERNOULLI = "bernoulli"


_ALIASES = {
    "normal": DistKind.NORMAL,
    "gaussian": DistKind.NORMAL,
    "standard_normal": DistKind.NORMAL,
    "standardnormal": DistKind.NORMAL,
    "rademacher": DistKind.RADEMACHER,
    "uniform": DistKind.UNIFORM,
    "uniform_symmetric": DistKind.UNIFORM,
    "uniformsymmetric": DistKind.UNIFORM,
    "bernoulli": DistKind.BERNOULLI,
    "scaled_bernoulli": DistKind.BERNOULLI,
    "scaledbernoullisymmetric": DistKind.BERNOULLI,
}


@dataclass(frozen=True)
class DistSpec:
    """A coordinate distribution with mean 0 and variance 1.

    Parameters
    ----------
    kind : DistKind
        ``normal`` (standard Gaussian), ``rademacher`` (uniform on
        {-1, +1}), ``uniform`` (uniform on [-sqrt(3), sqrt(3)]) or
        ``bernoulli`` (values +-1/sqrt(2p) with probability p each, 0
        otherwise).
    p : float, optional
        Only for ``bernoulli``; must lie in (0, 1/2].
    """

    kind: DistKind = DistKind.NORMAL
    p: float | None = None

    def __post_init__(self):
        try:
            kind = DistKind(self.kind) if not isinstance(self.kind, DistKind) else self.kind
        except ValueError:
            raise ConfigError(f"unknown distribution kind {self.kind!r}") from None
        object.__setattr__(self, "kind", kind)
        if kind is DistKind.BERNOULLI:
            if self.p is None:
                raise ConfigError("bernoulli distribution requires p")
            p = float(self.p)
            if not (0.0 < p <= 0.5) or math.isnan(p):
                raise ConfigError(f"bernoulli p must lie in (0, 1/2], got {self.p!r}")
            object.__setattr__(self, "p", p)
        elif self.p is not None:
            raise ConfigError(f"parameter p is only valid for bernoulli, not {kind.value}")

    @property
    def as_bound(self) -> float | None:
        """Almost-sure bound on ``|x|``, or None for unbounded laws."""
        if self.kind is DistKind.NORMAL:
            return None
        if self.kind is DistKind.RADEMACHER:
            return 1.0
        if self.kind is DistKind.UNIFORM:
            return math.sqrt(3.0)
        return _bernoulli_atom(self.p)

    @property
    def bounded(self) -> bool:
        return self.as_bound is not None

    @property
    def psi2(self) -> float:
        """Subgaussian norm (E exp(x^2/t^2) <= 2 convention). Reporting only."""
        return _psi2(self.kind, self.p)

    @classmethod
    def parse(cls, spec: Any) -> "DistSpec":
        """Build from a config mapping (``{kind = "bernoulli", p = 0.25}``),
        a string (``"rademacher"``, ``"bernoulli:0.25"``) or a DistSpec."""
        if isinstance(spec, DistSpec):
            return spec
        if isinstance(spec, Mapping):
            extra = set(spec) - {"kind", "p"}
            if extra:
                raise ConfigError(f"unknown distribution fields: {sorted(extra)}")
            if "kind" not in spec:
                raise ConfigError("distribution needs a 'kind'")
            return cls(_kind_from_name(spec["kind"]), spec.get("p"))
        if isinstance(spec, str):
            name, _, param = spec.partition(":")
            kind = _kind_from_name(name)
            if param:
                try:
                    return cls(kind, float(param))
                except ValueError:
                    raise ConfigError(f"bad distribution parameter in {spec!r}") from None
            return cls(kind)
        raise ConfigError(f"cannot interpret distribution {spec!r}")

    def to_config(self) -> dict:
        out: dict = {"kind": self.kind.value}
        if self.p is not None:
            out["p"] = self.p
        return out

    def __str__(self):
        return self.kind.value if self.p is None else f"{self.kind.value}:{self.p!r}"


def _kind_from_name(name: Any) -> DistKind:
    if isinstance(name, DistKind):
        return name
    key = str(name).strip().lower().replace("-", "_")
    try:
        return _ALIASES[key]
    except KeyError:
        raise ConfigError(f"unknown distribution kind {name!r}") from None


def _bernoulli_atom(p: float) -> float:
    return 1.0 / math.sqrt(2.0 * p)


@functools.lru_cache(maxsize=None)
def _psi2(kind: DistKind, p: float | None) -> float:
    if kind is DistKind.NORMAL:
        return math.sqrt(8.0 / 3.0)
    if kind is DistKind.RADEMACHER:
        return 1.0 / math.sqrt(math.log(2.0))
    if kind is DistKind.BERNOULLI:
        return 1.0 / math.sqrt(2.0 * p * math.log1p(1.0 / (2.0 * p)))
    a = math.sqrt(3.0)

    def excess(t):
        val, _ = integrate.quad(lambda u: math.exp(u * u / (t * t)), 0.0, a)
        return val / a - 2.0

    return optimize.brentq(excess, 0.5, 10.0, xtol=1e-12)


@dataclass(frozen=True)
class SeedSpec:
    """Identifies one independent random stream."""

    master_seed: int
    trial_index: int = 0
    mode_index: int = 0

    def __post_init__(self):
        for name, value, top in (
            ("master_seed", self.master_seed, _U64),
            ("trial_index", self.trial_index, _U64),
            ("mode_index", self.mode_index, _U32),
        ):
            if not isinstance(value, (int, np.integer)) or not 0 <= value <= top:
                raise ConfigError(f"{name} must be an integer in [0, {top}], got {value!r}")

    def with_mode(self, mode_index: int) -> "SeedSpec":
        return SeedSpec(self.master_seed, self.trial_index, mode_index)

    def generator(self) -> np.random.Generator:
        return make_generator(self.master_seed, self.trial_index, self.mode_index)


def make_generator(master_seed: int, trial_index: int, mode_index: int) -> np.random.Generator:
    # Fixed-width words keep the (seed, trial, mode) -> entropy map injective.
    words = np.array(
        [
            master_seed & _U32,
            master_seed >> 32,
            trial_index & _U32,
            trial_index >> 32,
            mode_index,
        ],
        dtype=np.uint32,
    )
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(words)))


def aux_generator(master_seed: int, tag: int) -> np.random.Generator:
    """Stream for quantities shared by all trials (operators, subspaces)."""
    return make_generator(master_seed, AUX_TRIAL_BASE + tag, 0)


def draw(dist: DistSpec, size, rng: np.random.Generator) -> np.ndarray:
    """Draw i.i.d. coordinates of ``dist`` with an explicit generator."""
    kind = dist.kind
    if kind is DistKind.NORMAL:
        return rng.standard_normal(size)
    if kind is DistKind.RADEMACHER:
        return np.where(rng.random(size) < 0.5, -1.0, 1.0)
    if kind is DistKind.UNIFORM:
        a = math.sqrt(3.0)
        return np.clip(rng.uniform(-a, a, size), -a, a)
    atom = _bernoulli_atom(dist.p)
    u = rng.random(size)
    return np.where(u < dist.p, atom, np.where(u < 2.0 * dist.p, -atom, 0.0))


def sample_vector(dist: DistSpec, n: int, seed: SeedSpec) -> np.ndarray:
    """Return n i.i.d. draws from ``dist``; bit-identical for equal seeds."""
    if int(n) != n or n < 1:
        raise ConfigError(f"vector length must be a positive integer, got {n!r}")
    return draw(dist, int(n), seed.generator())


def sample_factors(dist: DistSpec, n: int, d: int, seed: SeedSpec) -> list[np.ndarray]:
    """Draw the d factors of one simple tensor; factor k uses mode_index
    ``seed.mode_index + k``."""
    if int(d) != d or d < 1:
        raise ConfigError(f"degree d must be a positive integer, got {d!r}")
    return [sample_vector(dist, n, seed.with_mode(seed.mode_index + k)) for k in range(int(d))]


def sample_factor_block(
    dist: DistSpec,
    n: int,
    d: int,
    master_seed: int,
    trial_start: int,
    trial_stop: int,
    mode_offset: int = 0,
) -> np.ndarray:
    """Factors for a contiguous block of trials, shape ``(T, d, n)``.

    Row ``i`` equals ``sample_factors`` at trial ``trial_start + i``.
    """
    out = np.empty((trial_stop - trial_start, d, n))
    for row, trial in enumerate(range(trial_start, trial_stop)):
        for k in range(d):
            out[row, k] = draw(dist, n, make_generator(master_seed, trial, mode_offset + k))
    return out
