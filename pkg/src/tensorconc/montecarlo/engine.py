"""Trial scheduling.

Trials are split into chunks whose size depends only on the task, never on
the worker count. Each trial draws from its own seeded streams and chunks
are concatenated in trial order, so the output is identical for any number
of workers.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..rand_sources import DistSpec, sample_factor_block

DEFAULT_CHUNK = 2048
_CHUNK_ELEMENTS = 2**21

_worker_task = None


class TrialTask:
    """A picklable unit of work mapping a trial range to per-trial rows."""

    chunk = DEFAULT_CHUNK

    def block(self, start: int, stop: int) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class FactorTask(TrialTask):
    """Draws one simple tensor per trial and applies ``statistic`` to the
    ``(T, d, n)`` factor block."""

    dist: DistSpec
    n: int
    d: int
    master_seed: int
    statistic: object
    mode_offset: int = 0
    row_elements: int = 1

    @property
    def chunk(self) -> int:
        return max(16, min(DEFAULT_CHUNK, _CHUNK_ELEMENTS // max(self.row_elements, 1)))

    def block(self, start, stop):
        F = sample_factor_block(self.dist, self.n, self.d, self.master_seed, start, stop, self.mode_offset)
        return self.statistic(F)


def _init_worker(task):
    global _worker_task
    _worker_task = task


def _run_chunk(bounds):
    return _worker_task.block(*bounds)


def run_trials(task: TrialTask, n_trials: int, workers: int = 1) -> np.ndarray:
    """Evaluate ``task`` on trials ``0..n_trials-1`` and stack the rows."""
    size = task.chunk
    bounds = [(s, min(s + size, n_trials)) for s in range(0, n_trials, size)]
    if workers <= 1 or len(bounds) == 1:
        parts = [task.block(s, e) for s, e in bounds]
    else:
        workers = min(workers, len(bounds))
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(task,)) as pool:
            parts = list(pool.map(_run_chunk, bounds))
    return np.concatenate(parts, axis=0)
