"""Exhaustive check of the martingale-type product inequality

    E exp(f_1 + ... + f_d) 1_E <= pi_1 ... pi_d,

on small finite product spaces. Coordinate k is uniform on ``sizes[k]``
atoms; ``f_k`` depends on ``(x_k, ..., x_d)``; the event ``E_k`` (k >= 2)
depends on ``(x_{k+1}, ..., x_d)`` and ``E_{d+1}`` is the whole space.
``pi_k`` is the largest conditional mean ``E_{x_k} exp(f_k)`` over the
atoms of ``E_{k+1}`` (0 if ``E_{k+1}`` is empty).

Arrays are indexed with coordinate 1 first, so an array over
``(x_k, ..., x_d)`` broadcasts against the full grid without reshaping.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from . import config as cfg
from .config import ExperimentConfig
from .report import Record
from ..rand_sources import aux_generator

MAX_ATOMS = 10**6
MAX_DEGREE = 4
REL_TOL = 1e-12


@dataclass(frozen=True)
class MartingaleInstance:
    """One finite instance: ``f[k]`` (that is f_{k+1}) has shape
    ``sizes[k:]``; ``events[k]`` (that is E_{k+2}) has shape ``sizes[k+2:]``."""

    sizes: tuple[int, ...]
    f: tuple[np.ndarray, ...]
    events: tuple[np.ndarray, ...]

    @property
    def d(self) -> int:
        return len(self.sizes)


@dataclass(frozen=True)
class MartingaleOutcome:
    lhs: float
    pis: tuple[float, ...]
    rhs: float
    ok: bool


def _check_sizes(sizes) -> tuple[int, ...]:
    sizes = tuple(int(s) for s in sizes)
    if not 1 <= len(sizes) <= MAX_DEGREE:
        raise ConfigError(f"martingale check needs 1 <= d <= {MAX_DEGREE}, got d = {len(sizes)}")
    if min(sizes) < 1:
        raise ConfigError("every space needs at least one atom")
    if math.prod(sizes) > MAX_ATOMS:
        raise ConfigError(f"product of space sizes exceeds {MAX_ATOMS}")
    return sizes


def random_instance(sizes, value_bound: float, rng: np.random.Generator) -> MartingaleInstance:
    sizes = _check_sizes(sizes)
    if not value_bound >= 0:
        raise ConfigError("value bound must be nonnegative")
    d = len(sizes)
    f = tuple(rng.uniform(-value_bound, value_bound, sizes[k:]) for k in range(d))
    events = []
    for k in range(d - 1):
        # E_{k+2}; keep most atoms so the events are rarely empty
        events.append(rng.random(sizes[k + 2:]) < rng.uniform(0.5, 1.0))
    events.append(np.ones((), dtype=bool))  # E_{d+1}: whole space
    return MartingaleInstance(sizes, f, tuple(events))


def evaluate(inst: MartingaleInstance) -> MartingaleOutcome:
    """Both sides of the inequality by exact enumeration."""
    d = inst.d
    pis = []
    for k in range(d):
        cond = np.exp(inst.f[k]).mean(axis=0)  # E_{x_k} exp(f_k), over sizes[k+1:]
        admissible = cond[np.broadcast_to(inst.events[k], cond.shape)]
        pis.append(float(admissible.max()) if admissible.size else 0.0)
    total = np.zeros(inst.sizes)
    for fk in inst.f:
        total = total + fk
    E = np.ones(inst.sizes, dtype=bool)
    for ev in inst.events[:-1]:
        E = E & ev
    lhs = float(np.mean(np.exp(total) * E))
    rhs = math.prod(pis)
    return MartingaleOutcome(lhs, tuple(pis), rhs, lhs <= rhs * (1.0 + REL_TOL))


def martingale_outcomes(space_sizes, value_bound: float = 2.0, instances: int = 100, seed: int = 0):
    rng = aux_generator(seed, cfg.AUX_MARTINGALE)
    return [evaluate(random_instance(space_sizes, value_bound, rng)) for _ in range(instances)]


def run_martingale_check(space_sizes, value_bound: float = 2.0, instances: int = 100, seed: int = 0) -> bool:
    """True iff the inequality holds on every random instance."""
    return all(o.ok for o in martingale_outcomes(space_sizes, value_bound, instances, seed))


def run_martingale_experiment(config: ExperimentConfig) -> Record:
    from .experiments import metadata

    outs = martingale_outcomes(config.space_sizes, config.value_bound, config.instances, config.master_seed)
    failures = sum(not o.ok for o in outs)
    rows = [[i, o.lhs, o.rhs, o.ok] for i, o in enumerate(outs)]
    vals = {
        "space_sizes": list(config.space_sizes),
        "value_bound": config.value_bound,
        "instances": len(outs),
        "failures": failures,
        "max_ratio": max((o.lhs / o.rhs for o in outs if o.rhs > 0), default=0.0),
    }
    return Record(config.experiment.value, vals, ["instance", "lhs", "rhs", "ok"], rows, metadata(config),
                  ok=failures == 0)
