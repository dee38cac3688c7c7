"""The numba and numpy kernel paths, checked against each other and against scipy."""

from __future__ import annotations

import os
import subprocess
import sys

import numpy as np
import pytest

from dsdreg import kernels
from dsdreg._accel import HAS_NUMBA

needs_numba = pytest.mark.skipif(not HAS_NUMBA, reason="numba not installed")
PATHS = [pytest.param(True, marks=needs_numba, id="numba"), pytest.param(False, id="numpy")]


def _problem(rng, m, n, free_last=True):
    A = rng.normal(size=(m, n))
    b = rng.normal(size=m) * rng.uniform(0.1, 10)
    c = np.ones(n, dtype=bool)
    if free_last:
        c[-1] = False
    return A, b, c


def _objective(A, b, x):
    r = A @ x - b
    return float(r @ r)


@pytest.mark.parametrize("use_numba", PATHS)
def test_bvls_oracle(use_numba):
    lsq_linear = pytest.importorskip("scipy.optimize").lsq_linear
    rng = np.random.default_rng(20240601)
    for _ in range(150):
        m = int(rng.integers(2, 15))
        n = int(rng.integers(1, 8))
        A, b, c = _problem(rng, m, n, free_last=bool(rng.integers(0, 2)))
        lb = np.where(c, 0.0, -np.inf)
        ref = lsq_linear(A, b, bounds=(lb, np.inf), method="bvls", tol=1e-14).x
        x, _, _, status = kernels.nnls_free(A, b, c, 10 * n + 10, use_numba=use_numba)
        assert status == kernels.STATUS_OK
        assert np.all(x[c] >= 0)
        f, g = _objective(A, b, x), _objective(A, b, ref)
        assert f <= g + 1e-9 * max(1.0, g)


@pytest.mark.parametrize("use_numba", PATHS)
def test_unconstrained_matches_lstsq(use_numba):
    rng = np.random.default_rng(1)
    A = rng.normal(size=(20, 4))
    b = rng.normal(size=20)
    x, passive, _, status = kernels.nnls_free(A, b, np.zeros(4, bool), 40, use_numba=use_numba)
    assert status == kernels.STATUS_OK and passive.all()
    np.testing.assert_allclose(x, np.linalg.lstsq(A, b, rcond=None)[0], rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("use_numba", PATHS)
def test_iteration_cap_reported(use_numba):
    rng = np.random.default_rng(5)
    A, b, c = _problem(rng, 30, 6)
    x_full, _, iters, _ = kernels.nnls_free(A, b, c, 100, use_numba=use_numba)
    if iters == 0:
        pytest.skip("problem solved without any entering step")
    _, _, _, status = kernels.nnls_free(A, b, c, 0, use_numba=use_numba)
    assert status == kernels.STATUS_MAXITER


@needs_numba
def test_paths_agree():
    rng = np.random.default_rng(99)
    for _ in range(100):
        A, b, c = _problem(rng, int(rng.integers(3, 30)), int(rng.integers(1, 8)))
        xa = kernels.nnls_free(A, b, c, 100, use_numba=True)
        xb = kernels.nnls_free(A, b, c, 100, use_numba=False)
        np.testing.assert_allclose(xa[0], xb[0], rtol=1e-9, atol=1e-11)
        np.testing.assert_array_equal(xa[1], xb[1])


@pytest.mark.parametrize("use_numba", PATHS)
def test_row_min_max(use_numba):
    U = np.random.default_rng(2).random((7, 33))
    lo, hi = kernels.row_min_max(U, use_numba=use_numba)
    np.testing.assert_array_equal(lo, U.min(axis=1))
    np.testing.assert_array_equal(hi, U.max(axis=1))


def test_env_flag_disables_numba():
    code = "from dsdreg import _accel; print(_accel.USE_NUMBA)"
    env = dict(os.environ, DSDREG_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "False"
    env["DSDREG_DISABLE_NUMBA"] = "0"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == str(HAS_NUMBA)
