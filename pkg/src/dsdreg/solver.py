"""Parameter estimation for the DSD model.

The fit minimises the sum over units of squared Mallows distances between the
observed response interval and the predicted one,

    sum_j (c_Y - sum_k (a_k - b_k) c_Xk - g)^2
        + 1/3 sum_j (r_Y - sum_k (a_k + b_k) r_Xk)^2,

subject to ``a_k, b_k >= 0``. Stacking the center rows on top of the
half-range rows scaled by ``1/sqrt(3)`` turns this into an ordinary
least-squares problem with non-negativity on every column but the intercept.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .interval import DomainError, IntervalVariable, SymbolicTable

SQRT3 = math.sqrt(3.0)
KKT_RTOL = 1e-8

NONE = "none"
ALL_SYMMETRIC = "all_symmetric"
ALL_DEGENERATE = "all_degenerate"


class ConvergenceError(RuntimeError):
    """The active-set loop hit its iteration cap."""

    def __init__(self, message, coefficients=None, diagnostics=None):
        super().__init__(message)
        self.coefficients = coefficients
        self.diagnostics = diagnostics


class DegenerateDesignError(ValueError):
    """The closed form needs a strictly convex objective and this design is not."""


@dataclass(frozen=True)
class DsdCoefficients:
    """Weights on each predictor's quantile function (``alphas``), on its
    reflection (``betas``), and a free intercept ``gamma``."""

    alphas: tuple[float, ...]
    betas: tuple[float, ...]
    gamma: float

    def __post_init__(self) -> None:
        a = tuple(float(v) for v in self.alphas)
        b = tuple(float(v) for v in self.betas)
        if len(a) != len(b):
            raise DomainError("alphas and betas must have the same length")
        if any(v < 0 for v in a + b):
            raise DomainError(f"alphas and betas must be non-negative, got {a}, {b}")
        object.__setattr__(self, "alphas", a)
        object.__setattr__(self, "betas", b)
        object.__setattr__(self, "gamma", float(self.gamma))

    @property
    def p(self) -> int:
        return len(self.alphas)

    def as_vector(self) -> np.ndarray:
        """Layout ``(a_1, b_1, ..., a_p, b_p, g)`` matching the stacked design."""
        v = np.empty(2 * self.p + 1)
        v[0:-1:2] = self.alphas
        v[1:-1:2] = self.betas
        v[-1] = self.gamma
        return v

    @classmethod
    def from_vector(cls, v) -> "DsdCoefficients":
        v = np.asarray(v, dtype=float)
        if v.ndim != 1 or v.size % 2 != 1:
            raise DomainError(f"coefficient vector must have odd length 2p+1, got shape {v.shape}")
        # clip signed zeros / tiny negatives left by a floating solve
        ab = np.where(v[:-1] < 0, 0.0, v[:-1])
        return cls(tuple(ab[0::2]), tuple(ab[1::2]), float(v[-1]))

    @classmethod
    def single(cls, alpha: float, beta: float, gamma: float) -> "DsdCoefficients":
        return cls((alpha,), (beta,), gamma)


@dataclass(frozen=True)
class StackedSystem:
    """``design`` is 2m x (2p+1); the first m rows hold centers, the rest
    half-ranges divided by sqrt(3)."""

    design: np.ndarray
    target: np.ndarray
    m: int
    p: int

    def __post_init__(self) -> None:
        d = np.asarray(self.design, dtype=float)
        t = np.asarray(self.target, dtype=float)
        if d.shape != (2 * self.m, 2 * self.p + 1) or t.shape != (2 * self.m,):
            raise DomainError(
                f"stacked system shape mismatch: design {d.shape}, target {t.shape}, m={self.m}, p={self.p}"
            )
        d.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "design", d)
        object.__setattr__(self, "target", t)


@dataclass(frozen=True)
class SolveDiagnostics:
    objective: float
    active_set: frozenset[int]
    unique: bool
    iterations: int


@dataclass(frozen=True)
class CollinearityReport:
    names: tuple[str, ...]
    flags: tuple[str, ...]

    def __getitem__(self, name: str) -> str:
        return self.flags[self.names.index(name)]

    @property
    def any(self) -> bool:
        return any(f != NONE for f in self.flags)


@dataclass(frozen=True)
class KktReport:
    """Scaled KKT residuals of a candidate solution; ``ok`` when all are within tolerance."""

    ok: bool
    gradient: np.ndarray = field(repr=False)
    scale: float
    stationarity: float
    dual_feasibility: float
    primal_feasibility: float


def build_stacked_arrays(cy, ry, cx, rx) -> StackedSystem:
    """Array-level constructor; ``cx``/``rx`` have shape (m, p)."""
    cy = np.asarray(cy, dtype=float)
    ry = np.asarray(ry, dtype=float)
    cx = np.atleast_2d(np.asarray(cx, dtype=float))
    rx = np.atleast_2d(np.asarray(rx, dtype=float))
    m, p = cx.shape
    A = np.zeros((2 * m, 2 * p + 1))
    A[:m, 0:-1:2] = cx
    A[:m, 1:-1:2] = -cx
    A[:m, -1] = 1.0
    A[m:, 0:-1:2] = rx / SQRT3
    A[m:, 1:-1:2] = rx / SQRT3
    target = np.concatenate([cy, ry / SQRT3])
    return StackedSystem(A, target, m, p)


def build_stacked_system(table: SymbolicTable) -> StackedSystem:
    cx = np.column_stack([v.centers for v in table.explicatives])
    rx = np.column_stack([v.half_ranges for v in table.explicatives])
    return build_stacked_arrays(table.response.centers, table.response.half_ranges, cx, rx)


def objective_value(sys: StackedSystem, b: DsdCoefficients) -> float:
    """Sum of squared Mallows distances between observed and predicted intervals."""
    if b.p != sys.p:
        raise DomainError(f"coefficients have p={b.p}, system has p={sys.p}")
    resid = sys.target - sys.design @ b.as_vector()
    return float(resid @ resid)


def _kkt_scale(sys: StackedSystem) -> float:
    a = float(np.max(np.abs(sys.design))) if sys.design.size else 1.0
    return max(a, 1.0) * max(float(np.linalg.norm(sys.target)), 1.0)


def kkt_certificate(sys: StackedSystem, b: DsdCoefficients, rtol: float = KKT_RTOL) -> KktReport:
    """Check first-order optimality of ``b`` for the non-negative least-squares fit.

    The gradient of the objective is ``2 A^T (A x - y)``. The intercept and
    every strictly positive weight need a vanishing gradient; weights at zero
    need a non-negative gradient (increasing them cannot help).
    """
    x = b.as_vector()
    g = 2.0 * sys.design.T @ (sys.design @ x - sys.target)
    scale = _kkt_scale(sys)
    tol = rtol * scale
    free = np.ones_like(x, dtype=bool)
    free[:-1] = x[:-1] > 0
    stat = float(np.max(np.abs(g[free]))) if free.any() else 0.0
    at_zero = ~free
    dual = float(max(0.0, -np.min(g[at_zero]))) if at_zero.any() else 0.0
    primal = float(max(0.0, -np.min(x[:-1]))) if x.size > 1 else 0.0
    ok = stat <= tol and dual <= tol and primal == 0.0
    return KktReport(ok, g, scale, stat, dual, primal)


def _min_norm_pairs(x: np.ndarray, design: np.ndarray, m: int, p: int) -> np.ndarray:
    """Pick the min-norm representative for predictors whose (alpha, beta) pair is
    not identified: only the difference matters when every half-range is zero,
    only the sum when every center is zero."""
    x = x.copy()
    for k in range(p):
        ia, ib = 2 * k, 2 * k + 1
        centers_zero = not np.any(design[:m, ia])
        ranges_zero = not np.any(design[m:, ia])
        if centers_zero and ranges_zero:
            x[ia] = x[ib] = 0.0
        elif ranges_zero:
            d = x[ia] - x[ib]
            x[ia], x[ib] = max(d, 0.0), max(-d, 0.0)
        elif centers_zero:
            s = x[ia] + x[ib]
            x[ia] = x[ib] = s / 2.0
    return x


def solve_constrained_ls(sys: StackedSystem, *, use_numba: bool | None = None):
    """Minimise the stacked least-squares objective under ``alpha, beta >= 0``.

    Returns
    -------
    (DsdCoefficients, SolveDiagnostics)

    Raises
    ------
    ConvergenceError
        When the active-set loop exceeds ``10 * (2p + 1)`` iterations; the
        error carries the last iterate and its diagnostics.
    """
    if sys.m < 1:
        raise DomainError("need at least one unit to fit")
    n = 2 * sys.p + 1
    constrained = np.ones(n, dtype=bool)
    constrained[-1] = False
    max_iter = 10 * n
    x, _passive, iterations, status = kernels.nnls_free(
        sys.design, sys.target, constrained, max_iter, use_numba=use_numba
    )
    x = _min_norm_pairs(np.asarray(x, dtype=float), sys.design, sys.m, sys.p)
    coef = DsdCoefficients.from_vector(x)
    resid = sys.target - sys.design @ coef.as_vector()
    rank = int(np.linalg.matrix_rank(sys.design)) if sys.design.size else 0
    diag = SolveDiagnostics(
        objective=float(resid @ resid),
        active_set=frozenset(int(k) for k in range(n - 1) if coef.as_vector()[k] == 0.0),
        unique=rank == n,
        iterations=int(iterations),
    )
    if status == kernels.STATUS_MAXITER:
        raise ConvergenceError(
            f"active-set solver did not converge within {max_iter} iterations",
            coefficients=coef,
            diagnostics=diag,
        )
    return coef, diag


def detect_collinearity(table: SymbolicTable) -> CollinearityReport:
    """Flag predictors whose intervals are all degenerate or all symmetric about 0."""
    flags = []
    for v in table.explicatives:
        scale = max(float(np.max(np.abs(np.r_[v.lowers, v.uppers]))), 1.0)
        tol = 1e-12 * scale
        if np.all(v.half_ranges <= tol):
            flags.append(ALL_DEGENERATE)
        elif np.all(np.abs(v.centers) <= tol):
            flags.append(ALL_SYMMETRIC)
        else:
            flags.append(NONE)
    return CollinearityReport(table.predictor_names, tuple(flags))


@dataclass(frozen=True)
class ClosedFormTerms:
    xbar: float
    ybar: float
    s_cc: float  # sum (c_X - Xbar)^2
    s_rr: float  # 1/3 sum r_X^2
    s_cy: float  # sum (c_Y - Ybar)(c_X - Xbar) == sum (c_Y - Ybar) c_X
    s_ry: float  # 1/3 sum r_X r_Y


def closed_form_terms(x: IntervalVariable, y: IntervalVariable) -> ClosedFormTerms:
    if len(x) != len(y):
        raise DomainError(f"length mismatch: {len(x)} vs {len(y)}")
    cx, rx, cy, ry = x.centers, x.half_ranges, y.centers, y.half_ranges
    xbar, ybar = float(cx.mean()), float(cy.mean())
    return ClosedFormTerms(
        xbar=xbar,
        ybar=ybar,
        s_cc=float(np.sum((cx - xbar) ** 2)),
        s_rr=float(np.sum(rx * rx)) / 3.0,
        s_cy=float(np.sum((cy - ybar) * (cx - xbar))),
        s_ry=float(np.sum(rx * ry)) / 3.0,
    )


CASE_BOTH = "both_positive"
CASE_ALPHA_ZERO = "alpha_zero"
CASE_BETA_ZERO = "beta_zero"
CASE_BOTH_ZERO = "both_zero"


def closed_form_case(terms: ClosedFormTerms) -> str:
    """Which constraints are active at the optimum of the single-predictor fit.

    After eliminating the intercept the objective separates into
    ``s_cc (d - s_cy/s_cc)^2 + s_rr (s - s_ry/s_rr)^2`` in ``d = a - b`` and
    ``s = a + b``; feasibility is ``s >= |d|``. ``s_ry`` is never negative, so
    the unconstrained optimum is interior iff ``s_ry s_cc > |s_cy| s_rr``;
    otherwise the sign of ``s_cy`` decides which weight is pinned at zero.
    Near-ties within rounding are routed to the outer branch.
    """
    t = terms
    lhs = t.s_ry * t.s_cc
    rhs = abs(t.s_cy) * t.s_rr
    tol = 1e-12 * max(lhs, rhs, np.finfo(float).tiny)
    if lhs - rhs > tol:
        return CASE_BOTH
    ctol = 1e-12 * math.sqrt(max(t.s_cc, np.finfo(float).tiny)) * max(abs(t.ybar), 1.0)
    if t.s_cy > ctol:
        return CASE_BETA_ZERO
    if t.s_cy < -ctol:
        return CASE_ALPHA_ZERO
    return CASE_BOTH_ZERO


def solve_single_closed_form(x: IntervalVariable, y: IntervalVariable) -> DsdCoefficients:
    """Explicit optimum for one predictor.

    Raises
    ------
    DegenerateDesignError
        If the objective is not strictly convex (all ``x`` intervals
        degenerate, all symmetric about zero, or all sharing one center).
    """
    t = closed_form_terms(x, y)
    scale = max(float(np.max(np.abs(np.r_[x.lowers, x.uppers]))), 1.0)
    if t.s_rr <= (1e-12 * scale) ** 2 * len(x):
        raise DegenerateDesignError(
            f"all intervals of {x.name!r} are degenerate; use solve_constrained_ls"
        )
    if np.all(np.abs(x.centers) <= 1e-12 * scale):
        raise DegenerateDesignError(
            f"all intervals of {x.name!r} are symmetric about zero; use solve_constrained_ls"
        )
    if t.s_cc <= (1e-12 * scale) ** 2 * len(x):
        raise DegenerateDesignError(
            f"all intervals of {x.name!r} share one center; use solve_constrained_ls"
        )

    case = closed_form_case(t)
    denom = t.s_cc + t.s_rr
    if case == CASE_BOTH:
        two = 2.0 * t.s_cc * t.s_rr
        alpha = (t.s_cy * t.s_rr + t.s_ry * t.s_cc) / two
        beta = (-t.s_cy * t.s_rr + t.s_ry * t.s_cc) / two
    elif case == CASE_ALPHA_ZERO:
        alpha, beta = 0.0, (t.s_ry - t.s_cy) / denom
    elif case == CASE_BETA_ZERO:
        alpha, beta = (t.s_ry + t.s_cy) / denom, 0.0
    else:
        alpha = beta = 0.0
    alpha, beta = max(alpha, 0.0), max(beta, 0.0)
    gamma = t.ybar - (alpha - beta) * t.xbar
    return DsdCoefficients.single(alpha, beta, gamma)


def coefficients_for(names: Sequence[str], b: DsdCoefficients) -> dict[str, tuple[float, float]]:
    """Map predictor names to their ``(alpha, beta)`` pair."""
    if len(names) != b.p:
        raise DomainError(f"{len(names)} names for p={b.p} coefficients")
    return {n: (a, c) for n, a, c in zip(names, b.alphas, b.betas)}
