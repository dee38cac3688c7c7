"""Goodness-of-fit measures shared by the DSD model and the baselines."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .interval import DomainError, IntervalVariable
from .mallows import mallows_sq_arrays
from .solver import DsdCoefficients


@dataclass(frozen=True)
class FitReport:
    rmse_m: float
    rmse_l: float
    rmse_u: float
    omega: float | None = None


def _bounds(pred) -> tuple[np.ndarray, np.ndarray]:
    """Accept an IntervalVariable, a sequence of Interval/PredictedBounds, or a (lo, hi) array pair."""
    if isinstance(pred, IntervalVariable):
        return pred.lowers, pred.uppers
    if isinstance(pred, tuple) and len(pred) == 2 and isinstance(pred[0], np.ndarray):
        return np.asarray(pred[0], dtype=float), np.asarray(pred[1], dtype=float)
    lo = np.array([p.lower for p in pred], dtype=float)
    hi = np.array([p.upper for p in pred], dtype=float)
    return lo, hi


def rmse_m(observed: IntervalVariable, predicted) -> float:
    """Root mean squared Mallows distance between observed and predicted intervals.

    Inverted predicted bounds (possible for some baselines) enter through their
    signed half-range ``(u - l) / 2``, i.e. the L2 distance to the affine
    function ``c + r(2t - 1)`` they define.
    """
    lo, hi = _bounds(predicted)
    if lo.size != len(observed):
        raise DomainError(f"length mismatch: {len(observed)} observed vs {lo.size} predicted")
    d = mallows_sq_arrays(observed.centers, observed.half_ranges, (lo + hi) / 2.0, (hi - lo) / 2.0)
    return float(np.sqrt(np.mean(d)))


def rmse_bounds(observed: IntervalVariable, predicted) -> tuple[float, float]:
    """``(rmse_l, rmse_u)``: RMS errors of the lower and of the upper bounds."""
    lo, hi = _bounds(predicted)
    if lo.size != len(observed):
        raise DomainError(f"length mismatch: {len(observed)} observed vs {lo.size} predicted")
    return (
        float(np.sqrt(np.mean((observed.lowers - lo) ** 2))),
        float(np.sqrt(np.mean((observed.uppers - hi) ** 2))),
    )


def fit_report(observed: IntervalVariable, predicted, omega: float | None = None) -> FitReport:
    rl, ru = rmse_bounds(observed, predicted)
    return FitReport(rmse_m(observed, predicted), rl, ru, omega)


@dataclass(frozen=True)
class ParamMse:
    alphas: tuple[float, ...]
    betas: tuple[float, ...]
    gamma: float

    def as_vector(self) -> np.ndarray:
        v = np.empty(2 * len(self.alphas) + 1)
        v[0:-1:2] = self.alphas
        v[1:-1:2] = self.betas
        v[-1] = self.gamma
        return v


def mse_params(estimates: Sequence[DsdCoefficients], truth: DsdCoefficients) -> ParamMse:
    """Per-parameter mean (over replications) of ``(estimate - truth)^2``."""
    if len(estimates) == 0:
        raise DomainError("mse_params needs at least one estimate")
    E = np.array([e.as_vector() for e in estimates])
    if E.shape[1] != 2 * truth.p + 1:
        raise DomainError(f"estimates have p={(E.shape[1] - 1) // 2}, truth has p={truth.p}")
    mse = np.mean((E - truth.as_vector()) ** 2, axis=0)
    return ParamMse(tuple(mse[0:-1:2]), tuple(mse[1:-1:2]), float(mse[-1]))
