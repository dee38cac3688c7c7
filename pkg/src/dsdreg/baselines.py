"""Literature baselines for interval regression: CM, MinMax, CRM and CCRM.

* CM fits centers on centers by OLS and applies that line to each bound.
* MinMax fits lower bounds on lower bounds and upper on upper, independently.
* CRM fits centers on centers and half-ranges on half-ranges.
* CCRM is CRM with every half-range coefficient (intercept included)
  constrained to be non-negative.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .interval import DomainError, Interval, SymbolicTable


class SingularFitError(ValueError):
    """An OLS sub-fit has a rank-deficient design."""


class BaselineMethod(str, enum.Enum):
    CM = "CM"
    MINMAX = "MinMax"
    CRM = "CRM"
    CCRM = "CCRM"

    @classmethod
    def parse(cls, tag: str) -> "BaselineMethod":
        for m in cls:
            if m.value.lower() == tag.strip().lower():
                return m
        raise ValueError(f"unknown baseline method {tag!r}; expected one of {[m.value for m in cls]}")


@dataclass(frozen=True)
class AffineFit:
    """``intercept + slopes @ x``."""

    intercept: float
    slopes: tuple[float, ...]

    def __call__(self, X: np.ndarray) -> np.ndarray:
        return self.intercept + np.atleast_2d(X) @ np.asarray(self.slopes)

    def as_vector(self) -> np.ndarray:
        return np.r_[self.intercept, self.slopes]


@dataclass(frozen=True)
class BaselineModel:
    method: BaselineMethod
    predictor_names: tuple[str, ...]
    center_fit: AffineFit | None = None
    range_fit: AffineFit | None = None
    lower_fit: AffineFit | None = None
    upper_fit: AffineFit | None = None

    @property
    def p(self) -> int:
        return len(self.predictor_names)

    def full_range_fit(self) -> AffineFit:
        """The half-range regression rewritten for full widths ``u - l``.

        Slopes are unchanged; the intercept doubles.
        """
        if self.range_fit is None:
            raise DomainError(f"{self.method.value} has no range regression")
        return AffineFit(2.0 * self.range_fit.intercept, self.range_fit.slopes)


@dataclass(frozen=True)
class PredictedBounds:
    """Predicted ``(lower, upper)``; the pair may be inverted for CM and MinMax."""

    lower: float
    upper: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.lower) and np.isfinite(self.upper)):
            raise DomainError(f"non-finite predicted bounds ({self.lower}, {self.upper})")

    @property
    def is_valid_interval(self) -> bool:
        return self.lower <= self.upper


def _with_intercept(X: np.ndarray) -> np.ndarray:
    return np.column_stack([np.ones(X.shape[0]), X])


def ols(X: np.ndarray, y: np.ndarray, what: str = "fit") -> AffineFit:
    """Ordinary least squares with intercept; rank-deficient designs are rejected."""
    D = _with_intercept(np.atleast_2d(np.asarray(X, dtype=float)))
    y = np.asarray(y, dtype=float)
    rank = np.linalg.matrix_rank(D)
    if rank < D.shape[1]:
        raise SingularFitError(f"{what}: design has rank {rank} < {D.shape[1]} columns")
    coef = np.linalg.lstsq(D, y, rcond=None)[0]
    return AffineFit(float(coef[0]), tuple(float(c) for c in coef[1:]))


def nonneg_ls(X: np.ndarray, y: np.ndarray, what: str = "fit") -> AffineFit:
    """Least squares with intercept where every coefficient is constrained ``>= 0``."""
    D = _with_intercept(np.atleast_2d(np.asarray(X, dtype=float)))
    n = D.shape[1]
    x, _, _, status = kernels.nnls_free(D, np.asarray(y, dtype=float), np.ones(n, dtype=bool), 10 * n)
    if status != kernels.STATUS_OK:
        raise RuntimeError(f"{what}: non-negative least squares did not converge")
    return AffineFit(float(x[0]), tuple(float(c) for c in x[1:]))


def _matrices(table: SymbolicTable):
    ex = table.explicatives
    return (
        np.column_stack([v.lowers for v in ex]),
        np.column_stack([v.uppers for v in ex]),
        np.column_stack([v.centers for v in ex]),
        np.column_stack([v.half_ranges for v in ex]),
    )


def fit_baseline(method: BaselineMethod | str, table: SymbolicTable) -> BaselineModel:
    if isinstance(method, str):
        method = BaselineMethod.parse(method)
    L, U, C, R = _matrices(table)
    y = table.response
    names = table.predictor_names
    if method is BaselineMethod.CM:
        return BaselineModel(method, names, center_fit=ols(C, y.centers, "CM centers"))
    if method is BaselineMethod.MINMAX:
        return BaselineModel(
            method,
            names,
            lower_fit=ols(L, y.lowers, "MinMax lower bounds"),
            upper_fit=ols(U, y.uppers, "MinMax upper bounds"),
        )
    center = ols(C, y.centers, f"{method.value} centers")
    if method is BaselineMethod.CRM:
        rng = ols(R, y.half_ranges, "CRM half-ranges")
    else:
        rng = nonneg_ls(R, y.half_ranges, "CCRM half-ranges")
    return BaselineModel(method, names, center_fit=center, range_fit=rng)


def predict_baseline_arrays(model: BaselineModel, lowers: np.ndarray, uppers: np.ndarray):
    """Vectorised prediction; returns ``(lower, upper)`` arrays, possibly inverted."""
    L = np.atleast_2d(np.asarray(lowers, dtype=float))
    U = np.atleast_2d(np.asarray(uppers, dtype=float))
    if L.shape[1] != model.p:
        raise DomainError(f"rows have {L.shape[1]} predictors, model expects {model.p}")
    m = model.method
    if m is BaselineMethod.CM:
        return model.center_fit(L), model.center_fit(U)
    if m is BaselineMethod.MINMAX:
        return model.lower_fit(L), model.upper_fit(U)
    c = model.center_fit((L + U) / 2.0)
    r = model.range_fit((U - L) / 2.0)
    return c - r, c + r


def predict_baseline(model: BaselineModel, xrow: Sequence[Interval]) -> PredictedBounds:
    if len(xrow) != model.p:
        raise DomainError(f"row has {len(xrow)} intervals, model expects {model.p}")
    lo, hi = predict_baseline_arrays(
        model, np.array([[x.lower for x in xrow]]), np.array([[x.upper for x in xrow]])
    )
    return PredictedBounds(float(lo[0]), float(hi[0]))
