"""Linear regression between interval-valued variables (the DSD model).

Intervals are treated as uniform distributions and compared through their
quantile functions under the Mallows (L2 Wasserstein) distance. The model
predicts the response quantile function from each predictor's quantile
function and the quantile function of its reflection, with non-negative
weights and a free intercept.
"""

from __future__ import annotations

from .baselines import BaselineMethod, fit_baseline, predict_baseline
from .interval import DomainError, Interval, IntervalVariable, SymbolicTable, symbolic_mean
from .io import load_forestfires, load_unemployment, read_table, write_table
from .mallows import mallows_sq
from .metrics import fit_report, mse_params, rmse_bounds, rmse_m
from .model import FittedDsdModel, fit, loo_predict, omega, predict_interval
from .solver import DsdCoefficients, solve_constrained_ls, solve_single_closed_form

__version__ = "0.1.0"

__all__ = [
    "BaselineMethod",
    "DomainError",
    "DsdCoefficients",
    "FittedDsdModel",
    "Interval",
    "IntervalVariable",
    "SymbolicTable",
    "fit",
    "fit_baseline",
    "fit_report",
    "load_forestfires",
    "load_unemployment",
    "loo_predict",
    "mallows_sq",
    "mse_params",
    "omega",
    "predict_baseline",
    "predict_interval",
    "read_table",
    "rmse_bounds",
    "rmse_m",
    "solve_constrained_ls",
    "solve_single_closed_form",
    "symbolic_mean",
    "write_table",
]
