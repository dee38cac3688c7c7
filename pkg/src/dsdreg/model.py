"""Fit / predict API of the DSD interval regression model."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .interval import (
    DomainError,
    Interval,
    IntervalVariable,
    SymbolicTable,
    _check_t,
    symbolic_mean,
)
from .mallows import mallows_sq_arrays
from .solver import (
    DsdCoefficients,
    SolveDiagnostics,
    build_stacked_system,
    solve_constrained_ls,
)


class DegenerateResponseError(ValueError):
    """Omega is undefined because the observed response has zero dispersion."""


@dataclass(frozen=True)
class ResidualFunction:
    """Per-unit affine error ``e_j(t) = center_resid + (2t - 1) * half_range_resid``."""

    center_resid: tuple[float, ...]
    half_range_resid: tuple[float, ...]

    def at(self, j: int, t: float) -> float:
        _check_t(t)
        return self.center_resid[j] + (2.0 * t - 1.0) * self.half_range_resid[j]


@dataclass(frozen=True)
class FittedDsdModel:
    coefficients: DsdCoefficients
    omega: float
    fitted: IntervalVariable
    diagnostics: SolveDiagnostics
    response_name: str
    predictor_names: tuple[str, ...]
    m: int

    @property
    def p(self) -> int:
        return len(self.predictor_names)

    def predict(self, rows: Sequence[Sequence[Interval]]) -> list[Interval]:
        return [predict_interval(self.coefficients, r) for r in rows]

    def predict_table(self, table: SymbolicTable) -> IntervalVariable:
        """Predict the response for a table with the same predictors (by name)."""
        cols = []
        for name in self.predictor_names:
            match = [v for v in table.explicatives if v.name == name]
            if not match:
                raise DomainError(f"table lacks predictor {name!r}")
            cols.append(match[0])
        lo, hi = predict_bounds_arrays(
            self.coefficients,
            np.column_stack([c.lowers for c in cols]),
            np.column_stack([c.uppers for c in cols]),
        )
        return IntervalVariable.from_bounds(self.response_name, lo, hi)

    def residuals(self, observed: IntervalVariable) -> ResidualFunction:
        return ResidualFunction(
            tuple(observed.centers - self.fitted.centers),
            tuple(observed.half_ranges - self.fitted.half_ranges),
        )


def _check_row(b: DsdCoefficients, xrow: Sequence[Interval]) -> None:
    if len(xrow) != b.p:
        raise DomainError(f"row has {len(xrow)} intervals, model expects {b.p}")


def predict_quantile(b: DsdCoefficients, xrow: Sequence[Interval], t: float) -> float:
    """Predicted response quantile at level ``t``."""
    _check_row(b, xrow)
    _check_t(t)
    c = b.gamma + sum((a - be) * x.center for a, be, x in zip(b.alphas, b.betas, xrow))
    r = sum((a + be) * x.half_range for a, be, x in zip(b.alphas, b.betas, xrow))
    return c + r * (2.0 * t - 1.0)


def predict_bounds_arrays(b: DsdCoefficients, lowers: np.ndarray, uppers: np.ndarray):
    """Vectorised prediction; ``lowers``/``uppers`` have shape (m, p)."""
    a = np.asarray(b.alphas)
    be = np.asarray(b.betas)
    lo = np.atleast_2d(lowers) @ a - np.atleast_2d(uppers) @ be + b.gamma
    hi = np.atleast_2d(uppers) @ a - np.atleast_2d(lowers) @ be + b.gamma
    return lo, hi


def predict_interval(b: DsdCoefficients, xrow: Sequence[Interval]) -> Interval:
    """``[sum(a l - b u) + g, sum(a u - b l) + g]``; valid because ``a, b >= 0``."""
    _check_row(b, xrow)
    lo = b.gamma + sum(a * x.lower - be * x.upper for a, be, x in zip(b.alphas, b.betas, xrow))
    hi = b.gamma + sum(a * x.upper - be * x.lower for a, be, x in zip(b.alphas, b.betas, xrow))
    return Interval(lo, hi)


@dataclass(frozen=True)
class InducedRegressions:
    center_slopes: tuple[float, ...]
    center_intercept: float
    range_slopes: tuple[float, ...]

    @property
    def relations(self) -> tuple[str, ...]:
        """``direct`` / ``inverse`` / ``none`` per predictor, from the center slope sign."""
        return tuple("direct" if s > 0 else "inverse" if s < 0 else "none" for s in self.center_slopes)


def induced_regressions(b: DsdCoefficients) -> InducedRegressions:
    """Center regression slopes ``a - b`` (intercept ``g``) and half-range slopes ``a + b``."""
    return InducedRegressions(
        tuple(a - be for a, be in zip(b.alphas, b.betas)),
        b.gamma,
        tuple(a + be for a, be in zip(b.alphas, b.betas)),
    )


def omega(observed: IntervalVariable, predicted: IntervalVariable) -> float:
    """Explained over total Mallows dispersion about the observed symbolic mean."""
    if len(observed) != len(predicted):
        raise DomainError(f"length mismatch: {len(observed)} observed vs {len(predicted)} predicted")
    ybar = symbolic_mean(observed)
    den = float(np.sum(mallows_sq_arrays(observed.centers, observed.half_ranges, ybar, 0.0)))
    if den <= 0.0:
        raise DegenerateResponseError(
            f"response {observed.name!r} has zero dispersion; omega is undefined"
        )
    num = float(np.sum(mallows_sq_arrays(predicted.centers, predicted.half_ranges, ybar, 0.0)))
    return num / den


def decomposition_check(observed: IntervalVariable, predicted: IntervalVariable):
    """Return ``(total, residual, explained)`` squared-Mallows sums.

    For a KKT-optimal fit ``total == residual + explained``.
    """
    if len(observed) != len(predicted):
        raise DomainError(f"length mismatch: {len(observed)} observed vs {len(predicted)} predicted")
    ybar = symbolic_mean(observed)
    oc, orr = observed.centers, observed.half_ranges
    pc, pr = predicted.centers, predicted.half_ranges
    total = float(np.sum(mallows_sq_arrays(oc, orr, ybar, 0.0)))
    residual = float(np.sum(mallows_sq_arrays(oc, orr, pc, pr)))
    explained = float(np.sum(mallows_sq_arrays(pc, pr, ybar, 0.0)))
    return total, residual, explained


def fit(table: SymbolicTable, *, use_numba: bool | None = None) -> FittedDsdModel:
    """Fit the DSD model of ``table.response`` on all explicative variables."""
    sys = build_stacked_system(table)
    coef, diag = solve_constrained_ls(sys, use_numba=use_numba)
    lo, hi = predict_bounds_arrays(
        coef,
        np.column_stack([v.lowers for v in table.explicatives]),
        np.column_stack([v.uppers for v in table.explicatives]),
    )
    # a, b >= 0 guarantees hi >= lo mathematically; rounding can flip a degenerate pair
    hi = np.maximum(hi, lo)
    fitted = IntervalVariable.from_bounds(table.response.name, lo, hi)
    return FittedDsdModel(
        coefficients=coef,
        omega=omega(table.response, fitted),
        fitted=fitted,
        diagnostics=diag,
        response_name=table.response.name,
        predictor_names=table.predictor_names,
        m=table.m,
    )


def loo_predict(table: SymbolicTable) -> list[Interval]:
    """Leave-one-out predictions: unit ``j`` predicted from a fit without it."""
    if table.m < 3:
        raise DomainError(f"leave-one-out needs m >= 3, got {table.m}")
    out = []
    for j in range(table.m):
        try:
            model = fit(table.drop(j))
        except Exception as exc:
            raise type(exc)(f"fit without unit {table.unit_labels[j]!r} failed: {exc}") from exc
        out.append(predict_interval(model.coefficients, table.row(j)))
    return out
