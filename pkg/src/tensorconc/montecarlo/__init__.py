"""Seeded Monte Carlo experiments."""
from .config import Experiment, ExperimentConfig, TestFunction, config_from_mapping
from .engine import FactorTask, TrialTask, run_trials
from .experiments import (
    make_chaos_matrix,
    make_operator,
    make_subspace,
    make_test_function,
    run_condition_experiment,
    run_experiment,
    run_mgf_experiment,
    run_multipliers,
    run_tail_experiment,
    run_variance_experiment,
)
from .martingale import run_martingale_check
from .report import Record, TailReport
from .stats import FitResult, fit_constant, variance_jackknife, wilson_interval

__all__ = [
    "Experiment",
    "ExperimentConfig",
    "FactorTask",
    "FitResult",
    "Record",
    "TailReport",
    "TestFunction",
    "TrialTask",
    "config_from_mapping",
    "fit_constant",
    "make_chaos_matrix",
    "make_operator",
    "make_subspace",
    "make_test_function",
    "run_condition_experiment",
    "run_experiment",
    "run_martingale_check",
    "run_mgf_experiment",
    "run_multipliers",
    "run_tail_experiment",
    "run_trials",
    "run_variance_experiment",
    "variance_jackknife",
    "wilson_interval",
]
