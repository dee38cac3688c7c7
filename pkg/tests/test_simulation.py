from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dsdreg import simulation as sim
from dsdreg.interval import DomainError, IntervalVariable
from dsdreg.solver import DsdCoefficients

TRUTH = DsdCoefficients.single(2, 1, -1)


class TestExplicative:
    def test_low_variability_support(self):
        spec = sim.VariabilitySpec.preset(sim.LOW, microdata_count=200)
        v = sim.gen_explicative(spec, 200, sim.make_rng(1))
        assert np.all(v.lowers > -2) and np.all(v.uppers < 6)
        assert np.all(v.lowers < v.uppers)
        # hull edges sit close to the drawn support edges
        assert np.all(v.lowers < 0.2) and np.all(v.uppers > 3.8)

    def test_two_draws_give_sorted_pair(self):
        spec = sim.VariabilitySpec(sim.LOW, (((0.0, 0.0), (1.0, 1.0)),), microdata_count=2)
        rng = sim.make_rng(3)
        v = sim.gen_explicative(spec, 5, rng)
        ref = sim.make_rng(3)
        ref.random(5), ref.random(5)  # support draws (degenerate here)
        u = ref.random((5, 2))
        np.testing.assert_array_equal(v.lowers, u.min(axis=1))
        np.testing.assert_array_equal(v.uppers, u.max(axis=1))

    def test_deterministic(self):
        spec = sim.VariabilitySpec.preset(sim.MIXED, microdata_count=100)
        a = sim.gen_explicative(spec, 20, sim.make_rng(7, 2, 3))
        b = sim.gen_explicative(spec, 20, sim.make_rng(7, 2, 3))
        assert a == b

    def test_mixed_uses_several_supports(self):
        spec = sim.VariabilitySpec.preset(sim.MIXED, microdata_count=50)
        v = sim.gen_explicative(spec, 300, sim.make_rng(0))
        assert v.uppers.max() > 28 and v.uppers.min() < 2.5

    def test_numba_and_numpy_paths_identical(self):
        spec = sim.VariabilitySpec.preset(sim.HIGH, microdata_count=300)
        a = sim.gen_explicative_bounds(spec, 10, sim.make_rng(5), use_numba=True)
        b = sim.gen_explicative_bounds(spec, 10, sim.make_rng(5), use_numba=False)
        np.testing.assert_array_equal(a[0], b[0])
        np.testing.assert_array_equal(a[1], b[1])

    def test_invalid_specs(self):
        with pytest.raises(DomainError):
            sim.VariabilitySpec(sim.LOW, (((0.0, 2.0), (1.0, 3.0)),))
        with pytest.raises(DomainError):
            sim.VariabilitySpec(sim.LOW, (((0.0, 1.0), (2.0, 3.0)),), microdata_count=1)
        with pytest.raises(DomainError):
            sim.VariabilitySpec.preset("extreme")


class TestResponse:
    def test_hand_example(self):
        c_star, r_star = sim.noiseless_response(TRUTH, np.array([[1.0]]), np.array([[1.0]]))
        c, r = sim.disturb(c_star, r_star, [1.0], [0.5])
        assert (c[0] - r[0], c[0] + r[0]) == (-2.5, 4.5)

    def test_noiseless(self):
        x = IntervalVariable.from_bounds("X", [0, 1], [2, 3])
        y = sim.gen_response(TRUTH, [x], sim.ErrorSpec(0, 0), sim.make_rng(0))
        assert (y[0].lower, y[0].upper) == (-3, 3)

    @given(st.floats(0, 1e3), st.integers(0, 2**31))
    def test_clamp_keeps_half_ranges_non_negative(self, b_scale, seed):
        rng = sim.make_rng(seed)
        spec = sim.VariabilitySpec.preset(sim.MIXED, microdata_count=20)
        x = sim.gen_explicative(spec, 25, rng)
        _, r_star = sim.noiseless_response(TRUTH, x.centers[:, None], x.half_ranges[:, None])
        a, b = sim.draw_errors(sim.ErrorSpec(1.0, b_scale), r_star, rng)
        assert np.all(np.abs(b) <= r_star.min())
        y = sim.gen_response(TRUTH, [x], sim.ErrorSpec(1.0, b_scale), rng)
        assert np.all(y.half_ranges >= 0)

    def test_linearity_scales(self):
        lo = np.array([-3.0, 1.0])
        hi = np.array([5.0, 2.0])
        low = sim.ErrorSpec.for_linearity(sim.LOW, lo, hi)
        high = sim.ErrorSpec.for_linearity(sim.HIGH, lo, hi)
        assert (low.a_scale, low.b_scale) == (4.0, 0.5)
        assert (high.a_scale, high.b_scale) == (0.5, 0.0625)


class TestStudies:
    def test_noiseless_cell(self):
        cfg = sim.StudyConfig(
            "I", TRUTH, (sim.VariabilitySpec.preset(sim.LOW, microdata_count=100),),
            (sim.ErrorSpec(0, 0),), (10,), replications=5, seed=1,
        )
        cell = sim.run_study1(cfg).cells[0]
        assert cell.omega_mean == pytest.approx(1, abs=1e-12)
        assert cell.rmse_m_mean < 1e-9
        assert max(cell.param_mse) < 1e-20

    def test_deterministic_and_worker_invariant(self):
        cfg = sim.study1_preset("7SA2", replications=3, sizes=(10,), microdata_count=50)
        cfg = sim.StudyConfig(cfg.study, cfg.truth, cfg.variability, cfg.errors[:3], cfg.sizes, 3, 9)
        a = sim.run_study(cfg, workers=1)
        b = sim.run_study(cfg, workers=2)
        assert a.rows() == b.rows()
        assert sim.run_study(cfg, workers=1).rows() == a.rows()

    def test_study2_report_schema(self):
        cfg = sim.study2_preset("4SA3", sim.LOW, replications=2, sizes=(10,), microdata_count=50)
        rep = sim.run_study2(cfg)
        cols = rep.columns()
        assert "alpha3_mse" in cols and "gamma_mean" in cols and "rmse_u_sd" in cols
        assert all(len(r) == len(cols) for r in rep.rows())
        assert all(c.omega_sd >= 0 and min(c.param_sd) >= 0 for c in rep.cells)

    def test_wrong_runner(self):
        cfg = sim.study1_preset("1SA2", replications=1)
        with pytest.raises(DomainError):
            sim.run_study2(cfg)

    def test_config_validation(self):
        var = (sim.VariabilitySpec.preset(sim.LOW),)
        with pytest.raises(DomainError):
            sim.StudyConfig("III", TRUTH, var, (sim.ErrorSpec(0, 0),), (10,))
        with pytest.raises(DomainError):
            sim.StudyConfig("I", TRUTH, var, (sim.ErrorSpec(0, 0),), (10,), replications=0)
        with pytest.raises(DomainError):
            sim.StudyConfig("II", TRUTH, var, ("medium",), (10,))
        with pytest.raises(DomainError):
            sim.StudyConfig("I", TRUTH, var * 2, (sim.ErrorSpec(0, 0),), (10,))

    def test_presets_cover_all_tables(self):
        for t in sim.STUDY1_TABLES:
            cfg = sim.study1_preset(t, replications=1)
            assert len(cfg.cells()) == len(cfg.errors) * 2
        for t in sim.STUDY2_TABLES:
            for v in (sim.LOW, sim.HIGH, sim.MIXED):
                assert sim.study2_preset(t, v, replications=1).p in (1, 3)

    def test_mse_decreases_with_m(self):
        """High linearity: per-parameter MSE is non-increasing in m for at least 9 of 10 macro-replications."""
        sizes = (10, 30, 100, 250)
        ok = 0
        for seed in range(10):
            cfg = sim.study2_preset(
                "1SA3", sim.LOW, replications=60, seed=1000 + seed, sizes=sizes,
                linearity=(sim.HIGH,), microdata_count=200,
            )
            rep = sim.run_study2(cfg)
            mse = np.array([c.param_mse for c in rep.cells])  # (len(sizes), 3)
            ok += bool(np.all(np.diff(mse, axis=0) <= 0))
        assert ok >= 9
