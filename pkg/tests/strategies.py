"""Hypothesis strategies shared by the test modules."""

from __future__ import annotations

import numpy as np
from hypothesis import strategies as st

from dsdreg.interval import Interval, IntervalVariable, SymbolicTable

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@st.composite
def intervals(draw, lo=-100.0, hi=100.0):
    a = draw(st.floats(lo, hi, allow_nan=False))
    b = draw(st.floats(lo, hi, allow_nan=False))
    return Interval(min(a, b), max(a, b))


@st.composite
def random_tables(draw, m_min=3, m_max=12, p_max=3):
    """Tables from a seeded generator; cheaper to shrink than cell-by-cell draws."""
    m = draw(st.integers(m_min, m_max))
    p = draw(st.integers(1, p_max))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    xs = []
    for k in range(p):
        c = rng.uniform(-10, 10, m)
        r = rng.uniform(0, 5, m)
        xs.append(IntervalVariable.from_centers(f"X{k + 1}", c, r))
    cy = rng.uniform(-10, 10, m)
    ry = rng.uniform(0, 5, m)
    y = IntervalVariable.from_centers("Y", cy, ry)
    return SymbolicTable(tuple(f"u{j}" for j in range(m)), y, tuple(xs))
