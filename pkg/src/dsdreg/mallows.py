"""Squared Mallows (L2 Wasserstein) distance between uniform intervals."""

from __future__ import annotations

import numpy as np

from .interval import DomainError, Interval, IntervalVariable, quantile_at, symbolic_mean


def mallows_sq(a: Interval, b: Interval) -> float:
    """Closed form ``(c_a - c_b)^2 + (r_a - r_b)^2 / 3``."""
    dc = a.center - b.center
    dr = a.half_range - b.half_range
    return dc * dc + (dr * dr) / 3.0


def mallows_sq_arrays(c1, r1, c2, r2) -> np.ndarray:
    """Vectorised :func:`mallows_sq` over center/half-range arrays."""
    dc = np.asarray(c1, dtype=float) - np.asarray(c2, dtype=float)
    dr = np.asarray(r1, dtype=float) - np.asarray(r2, dtype=float)
    return dc * dc + (dr * dr) / 3.0


def mallows_sq_numeric(a: Interval, b: Interval, n: int = 64) -> float:
    """Integrate the squared quantile-function gap over [0, 1] with composite Simpson.

    ``n`` is the number of panels; an odd ``n`` is rounded up to the next even
    number. The integrand is quadratic in ``t`` so the rule is exact up to
    rounding for every admissible ``n``.
    """
    if n < 2:
        raise DomainError(f"need at least 2 quadrature panels, got {n}")
    if n % 2:
        n += 1
    t = np.linspace(0.0, 1.0, n + 1)
    gap = np.array([quantile_at(a, ti) - quantile_at(b, ti) for ti in t])
    f = gap * gap
    h = 1.0 / n
    return float(h / 3.0 * (f[0] + f[-1] + 4.0 * f[1:-1:2].sum() + 2.0 * f[2:-1:2].sum()))


def total_dispersion(v: IntervalVariable) -> float:
    """Sum of squared Mallows distances from each interval to the symbolic mean point."""
    ybar = symbolic_mean(v)
    return float(np.sum((v.centers - ybar) ** 2) + np.sum(v.half_ranges**2) / 3.0)
