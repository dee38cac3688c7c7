"""Interval value types, their uniform quantile functions, and symbolic tables."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


def _check_t(t: float) -> None:
    if not (0.0 <= t <= 1.0):
        raise DomainError(f"quantile level t={t!r} outside [0, 1]")


@dataclass(frozen=True)
class Interval:
    """Closed real interval ``[lower, upper]``; degenerate when equal."""

    lower: float
    upper: float

    def __post_init__(self) -> None:
        lo, up = float(self.lower), float(self.upper)
        if not (math.isfinite(lo) and math.isfinite(up)):
            raise DomainError(f"interval bounds must be finite, got [{lo}, {up}]")
        if lo > up:
            raise DomainError(f"lower bound {lo} exceeds upper bound {up}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)

    @classmethod
    def from_center(cls, center: float, half_range: float) -> "Interval":
        return cls(center - half_range, center + half_range)

    @property
    def center(self) -> float:
        return (self.lower + self.upper) / 2.0

    @property
    def half_range(self) -> float:
        return (self.upper - self.lower) / 2.0

    @property
    def is_degenerate(self) -> bool:
        return self.lower == self.upper

    def __iter__(self):
        yield self.lower
        yield self.upper


def center_halfrange(i: Interval) -> tuple[float, float]:
    """Return ``(center, half_range)`` of an interval."""
    return i.center, i.half_range


def quantile_at(i: Interval, t: float) -> float:
    """Quantile function of the uniform distribution on ``i``: ``c + r(2t - 1)``."""
    _check_t(t)
    c, r = center_halfrange(i)
    return c + r * (2.0 * t - 1.0)


def symmetric_quantile_at(i: Interval, t: float) -> float:
    """Quantile function of the reflected interval ``-i``, i.e. ``-quantile_at(i, 1 - t)``."""
    _check_t(t)
    c, r = center_halfrange(i)
    return -c + r * (2.0 * t - 1.0)


@dataclass(frozen=True)
class IntervalVariable:
    """A named column of intervals, one per unit."""

    name: str
    values: tuple[Interval, ...]

    def __post_init__(self) -> None:
        vals = tuple(v if isinstance(v, Interval) else Interval(*v) for v in self.values)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_bounds(cls, name: str, lower: Iterable[float], upper: Iterable[float]) -> "IntervalVariable":
        return cls(name, tuple(Interval(lo, up) for lo, up in zip(lower, upper, strict=True)))

    @classmethod
    def from_centers(cls, name: str, centers: Iterable[float], half_ranges: Iterable[float]) -> "IntervalVariable":
        return cls(
            name,
            tuple(Interval.from_center(c, r) for c, r in zip(centers, half_ranges, strict=True)),
        )

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, j: int) -> Interval:
        return self.values[j]

    def __iter__(self):
        return iter(self.values)

    @property
    def lowers(self) -> np.ndarray:
        return np.array([v.lower for v in self.values], dtype=float)

    @property
    def uppers(self) -> np.ndarray:
        return np.array([v.upper for v in self.values], dtype=float)

    @property
    def centers(self) -> np.ndarray:
        return (self.lowers + self.uppers) / 2.0

    @property
    def half_ranges(self) -> np.ndarray:
        return (self.uppers - self.lowers) / 2.0

    def rename(self, name: str) -> "IntervalVariable":
        return IntervalVariable(name, self.values)

    def subset(self, indices: Sequence[int]) -> "IntervalVariable":
        return IntervalVariable(self.name, tuple(self.values[j] for j in indices))


def symbolic_mean(v: IntervalVariable) -> float:
    """Mean of the interval centers."""
    if len(v) == 0:
        raise DomainError(f"symbolic mean of empty variable {v.name!r}")
    return float(np.mean(v.centers))


def log_shift_transform(
    v: IntervalVariable,
    shift: float,
    name: str | None = None,
    unit_labels: Sequence[str] | None = None,
) -> IntervalVariable:
    """Map every bound through ``ln(bound + shift)``.

    The map is increasing, so it sends valid intervals to valid intervals.
    """
    out = []
    for j, iv in enumerate(v.values):
        if iv.lower + shift <= 0.0:
            unit = unit_labels[j] if unit_labels is not None else f"#{j}"
            raise DomainError(
                f"log transform of {v.name!r} undefined at unit {unit}: "
                f"lower bound {iv.lower} + shift {shift} <= 0"
            )
        out.append(Interval(math.log(iv.lower + shift), math.log(iv.upper + shift)))
    return IntervalVariable(name if name is not None else v.name, tuple(out))


@dataclass(frozen=True)
class SymbolicTable:
    """Unit labels, one interval-valued response and ``p >= 1`` explicative variables."""

    unit_labels: tuple[str, ...]
    response: IntervalVariable
    explicatives: tuple[IntervalVariable, ...]

    def __post_init__(self) -> None:
        labels = tuple(str(u) for u in self.unit_labels)
        object.__setattr__(self, "unit_labels", labels)
        object.__setattr__(self, "explicatives", tuple(self.explicatives))
        m = len(labels)
        if len(set(labels)) != m:
            seen, dups = set(), []
            for u in labels:
                if u in seen:
                    dups.append(u)
                seen.add(u)
            raise DomainError(f"unit labels must be unique; duplicated: {dups}")
        if not self.explicatives:
            raise DomainError("a symbolic table needs at least one explicative variable")
        for var in (self.response, *self.explicatives):
            if len(var) != m:
                raise DomainError(f"variable {var.name!r} has {len(var)} values, expected {m}")

    @property
    def m(self) -> int:
        return len(self.unit_labels)

    @property
    def p(self) -> int:
        return len(self.explicatives)

    @property
    def predictor_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.explicatives)

    def row(self, j: int) -> tuple[Interval, ...]:
        """Explicative intervals of unit ``j``."""
        return tuple(v[j] for v in self.explicatives)

    def rows(self) -> list[tuple[Interval, ...]]:
        return [self.row(j) for j in range(self.m)]

    def subset(self, indices: Sequence[int]) -> "SymbolicTable":
        return SymbolicTable(
            tuple(self.unit_labels[j] for j in indices),
            self.response.subset(indices),
            tuple(v.subset(indices) for v in self.explicatives),
        )

    def drop(self, j: int) -> "SymbolicTable":
        return self.subset([k for k in range(self.m) if k != j])
