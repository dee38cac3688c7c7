"""Hot numeric kernels with a numba path and a pure-numpy fallback.

Both paths share one source: the plain functions below are valid numpy code
and are additionally compiled with ``numba.njit`` when numba is installed.
:data:`USE_NUMBA` (see :mod:`dsdreg._accel`) selects which one the public
dispatchers call.
"""

from __future__ import annotations

import types

import numpy as np

from ._accel import HAS_NUMBA, USE_NUMBA, njit

__all__ = [
    "HAS_NUMBA",
    "USE_NUMBA",
    "STATUS_OK",
    "STATUS_MAXITER",
    "nnls_free",
    "row_min_max",
]

STATUS_OK = 0
STATUS_MAXITER = 1

# rcond for every least-squares sub-solve; singular values below
# LSTSQ_RCOND * s_max are treated as zero, which yields min-norm solutions.
LSTSQ_RCOND = 1e-13


def _subsolve(A, b, passive):
    n = A.shape[1]
    z = np.zeros(n)
    idx = np.nonzero(passive)[0]
    if idx.size == 0:
        return z
    sub = np.ascontiguousarray(A[:, idx])
    sol = np.linalg.lstsq(sub, b, LSTSQ_RCOND)[0]
    for k in range(idx.size):
        z[idx[k]] = sol[k]
    return z


def _nnls_free_impl(A, b, constrained, max_iter):
    """Lawson-Hanson active set with some columns left unconstrained.

    Returns ``(x, passive, iterations, status)``; ``passive[k]`` is False
    exactly for the constrained columns pinned at zero.
    """
    m, n = A.shape
    a_scale = max(np.max(np.abs(A)), 1.0) if A.size > 0 else 1.0
    b_scale = max(np.sqrt(np.dot(b, b)), 1.0)
    tol_w = 1e-12 * a_scale * b_scale * max(m, n)

    passive = np.logical_not(constrained)
    blocked = np.zeros(n, dtype=np.bool_)
    x = _subsolve(A, b, passive)
    iterations = 0
    status = STATUS_OK

    while True:
        w = A.T @ (b - A @ x)
        best = -1
        best_w = tol_w
        for k in range(n):
            # strict '>' keeps the lowest index on ties
            if constrained[k] and not passive[k] and not blocked[k] and w[k] > best_w:
                best = k
                best_w = w[k]
        if best < 0:
            break
        if iterations >= max_iter:
            status = STATUS_MAXITER
            break
        iterations += 1
        passive[best] = True

        while True:
            z = _subsolve(A, b, passive)
            t = 2.0
            hit = -1
            for k in range(n):
                if constrained[k] and passive[k] and z[k] <= 0.0:
                    denom = x[k] - z[k]
                    ratio = x[k] / denom if denom > 0.0 else 0.0
                    if ratio < t:
                        t = ratio
                        hit = k
            if hit < 0:
                x = z
                break
            if hit == best and x[best] == 0.0:
                # the entering column cannot move off zero (rank deficient
                # direction); drop it for the rest of the solve
                passive[best] = False
                blocked[best] = True
                break
            x = x + t * (z - x)
            x[hit] = 0.0
            for k in range(n):
                if constrained[k] and passive[k] and x[k] <= 0.0:
                    passive[k] = False
                    x[k] = 0.0
        for k in range(n):
            if constrained[k] and not passive[k]:
                x[k] = 0.0

    return x, passive, iterations, status


def _row_min_max_impl(U):
    rows, cols = U.shape
    lo = np.empty(rows)
    hi = np.empty(rows)
    for i in range(rows):
        a = U[i, 0]
        c = U[i, 0]
        for j in range(1, cols):
            v = U[i, j]
            if v < a:
                a = v
            elif v > c:
                c = v
        lo[i] = a
        hi[i] = c
    return lo, hi


def _row_min_max_numpy(U):
    return U.min(axis=1), U.max(axis=1)


def _rebind(fn, **names):
    # same code object, globals patched so numba sees jitted helpers
    env = dict(fn.__globals__)
    env.update(names)
    return types.FunctionType(fn.__code__, env, fn.__name__, fn.__defaults__, fn.__closure__)


_nnls_free_numpy = _nnls_free_impl
_nnls_free_jit = njit(cache=True)(
    _rebind(_nnls_free_impl, _subsolve=njit(cache=True)(_subsolve))
)
_row_min_max_jit = njit(cache=True)(_row_min_max_impl)


def nnls_free(A, b, constrained, max_iter, *, use_numba=None):
    """Solve ``min ||A x - b||`` with ``x[k] >= 0`` where ``constrained[k]``.

    Parameters
    ----------
    A : ndarray, shape (m, n)
    b : ndarray, shape (m,)
    constrained : bool ndarray, shape (n,)
        Columns subject to non-negativity; the others are free.
    max_iter : int
        Cap on entering iterations of the active-set loop.
    use_numba : bool, optional
        Override the module-wide :data:`USE_NUMBA` choice.

    Returns
    -------
    x, passive, iterations, status
    """
    A = np.ascontiguousarray(A, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    constrained = np.ascontiguousarray(constrained, dtype=np.bool_)
    if use_numba is None:
        use_numba = USE_NUMBA
    if use_numba and HAS_NUMBA:
        return _nnls_free_jit(A, b, constrained, int(max_iter))
    return _nnls_free_numpy(A, b, constrained, int(max_iter))


def row_min_max(U, *, use_numba=None):
    """Per-row minimum and maximum of a 2-D array in one pass."""
    U = np.ascontiguousarray(U, dtype=np.float64)
    if use_numba is None:
        use_numba = USE_NUMBA
    if use_numba and HAS_NUMBA:
        return _row_min_max_jit(U)
    return _row_min_max_numpy(U)
