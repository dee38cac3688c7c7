from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given

from dsdreg.interval import DomainError, Interval, IntervalVariable
from dsdreg.mallows import mallows_sq, mallows_sq_arrays, mallows_sq_numeric, total_dispersion

from strategies import intervals


def test_identity():
    iv = Interval(-2.5, 7)
    assert mallows_sq(iv, iv) == 0
    assert mallows_sq_numeric(iv, iv, 10) == 0


def test_shifted_unit_intervals():
    assert mallows_sq(Interval(0, 2), Interval(1, 3)) == 1
    assert mallows_sq_numeric(Interval(0, 2), Interval(1, 3), 16) == pytest.approx(1, abs=1e-12)


def test_interval_against_its_center():
    expected = 14**2 / 3
    assert mallows_sq(Interval(25, 53), Interval(39, 39)) == pytest.approx(expected)
    assert mallows_sq_numeric(Interval(25, 53), Interval(39, 39)) == pytest.approx(expected, rel=1e-12)


def test_reflected_pair():
    assert mallows_sq_numeric(Interval(-3, -1), Interval(1, 3), 16) == pytest.approx(16, abs=1e-12)


def test_numeric_panel_count():
    with pytest.raises(DomainError):
        mallows_sq_numeric(Interval(0, 1), Interval(0, 1), 1)
    # odd counts are rounded up rather than rejected
    assert mallows_sq_numeric(Interval(0, 2), Interval(1, 3), 3) == pytest.approx(1, abs=1e-12)


@given(intervals(), intervals())
def test_closed_form_matches_quadrature(a, b):
    d = mallows_sq(a, b)
    scale = max(abs(a.lower), abs(a.upper), abs(b.lower), abs(b.upper), 1.0) ** 2
    assert mallows_sq_numeric(a, b) == pytest.approx(d, rel=1e-9, abs=1e-12 * scale)


@given(intervals(), intervals())
def test_symmetric_and_non_negative(a, b):
    assert mallows_sq(a, b) == mallows_sq(b, a) >= 0


def test_arrays_match_scalar():
    rng = np.random.default_rng(3)
    c1, c2 = rng.normal(size=(2, 20))
    r1, r2 = rng.uniform(0, 2, size=(2, 20))
    vec = mallows_sq_arrays(c1, r1, c2, r2)
    for j in range(20):
        assert vec[j] == pytest.approx(
            mallows_sq(Interval.from_center(c1[j], r1[j]), Interval.from_center(c2[j], r2[j]))
        )


class TestTotalDispersion:
    def test_constant(self):
        assert total_dispersion(IntervalVariable.from_bounds("v", [2, 2], [2, 2])) == 0

    def test_hand_sum(self):
        v = IntervalVariable.from_bounds("v", [0, 2], [2, 4])
        assert total_dispersion(v) == pytest.approx(2 + 2 / 3)

    def test_definition(self):
        rng = np.random.default_rng(0)
        v = IntervalVariable.from_centers("v", rng.normal(size=15), rng.uniform(0, 3, 15))
        ybar = float(np.mean(v.centers))
        direct = sum(mallows_sq(iv, Interval(ybar, ybar)) for iv in v)
        assert total_dispersion(v) == pytest.approx(direct, rel=1e-12)
