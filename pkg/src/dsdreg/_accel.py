"""Optional numba acceleration.

Set ``DSDREG_DISABLE_NUMBA=1`` to force the pure-numpy code paths, e.g. when
numba is unavailable or for debugging.
"""

from __future__ import annotations

import os

_FALSY = {"", "0", "false", "no", "off"}

DISABLED_BY_ENV = os.environ.get("DSDREG_DISABLE_NUMBA", "").strip().lower() not in _FALSY

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is an optional speedup
    _numba = None

HAS_NUMBA = _numba is not None
USE_NUMBA = HAS_NUMBA and not DISABLED_BY_ENV


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, identity decorator otherwise.

    The decorator is applied whenever numba exists (even if disabled by the
    environment flag) so that benchmarks can still compare both paths; the
    dispatch in :mod:`dsdreg.kernels` decides which one is actually called.
    """
    if HAS_NUMBA:
        return _numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def wrap(fn):
        return fn

    return wrap
