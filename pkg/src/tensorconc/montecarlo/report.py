"""Result records emitted by the experiments.

Every record offers ``to_dict()`` (JSON-ready, deterministic) and
``csv_table()`` (header plus rows). Floats are kept as Python floats so both
formats use the shortest round-trip representation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np


def clean(value):
    """Convert numpy scalars/arrays to plain data; non-finite floats to None."""
    if isinstance(value, dict):
        return {str(k): clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return [clean(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


@dataclass
class TailReport:
    experiment: str
    statistic: str
    grid: list[float]
    survival: list[float]
    stderr: list[float]
    wilson_lo: list[float]
    wilson_hi: list[float]
    bound_default_c: list[float]
    bound_fitted_c: list[float] | None
    in_range: list[bool]
    fitted_c: float | None
    fit_r2: float | None
    fit_points: int
    fit_diagnostic: str
    summary: dict[str, Any]
    metadata: dict[str, Any]
    samples: dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict[str, Any]:
        return clean(
            {
                "kind": "tail",
                "experiment": self.experiment,
                "statistic": self.statistic,
                "grid": self.grid,
                "survival": self.survival,
                "stderr": self.stderr,
                "wilson_lo": self.wilson_lo,
                "wilson_hi": self.wilson_hi,
                "bound_default_c": self.bound_default_c,
                "bound_fitted_c": self.bound_fitted_c,
                "in_range": self.in_range,
                "fitted_c": self.fitted_c,
                "fit_r2": self.fit_r2,
                "fit_points": self.fit_points,
                "fit_diagnostic": self.fit_diagnostic,
                "summary": self.summary,
                "metadata": self.metadata,
            }
        )

    def csv_table(self):
        header = ["t", "survival", "wilson_lo", "wilson_hi", "bound_default_c", "bound_fitted_c"]
        fitted = self.bound_fitted_c or [None] * len(self.grid)
        rows = [
            [t, s, lo, hi, b, bf]
            for t, s, lo, hi, b, bf in zip(
                self.grid, self.survival, self.wilson_lo, self.wilson_hi, self.bound_default_c, fitted
            )
        ]
        return header, rows


@dataclass
class Record:
    """Generic result: scalar fields, optional table, metadata."""

    experiment: str
    values: dict[str, Any]
    table_header: list[str]
    table_rows: list[list[Any]]
    metadata: dict[str, Any]
    ok: bool | None = None

    def to_dict(self) -> dict[str, Any]:
        out = {"kind": "record", "experiment": self.experiment, **self.values}
        out["table"] = {"columns": self.table_header, "rows": self.table_rows}
        if self.ok is not None:
            out["ok"] = self.ok
        out["metadata"] = self.metadata
        return clean(out)

    def csv_table(self):
        return self.table_header, self.table_rows

    def __getitem__(self, key):
        return self.values[key]
