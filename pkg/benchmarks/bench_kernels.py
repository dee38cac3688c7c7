#!/usr/bin/env python3
"""Compare the numba and pure-numpy paths of the hot kernels.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``. Each kernel is
warmed up once per path (so JIT compilation is excluded), then timed with
``timeit``; the two paths are also checked to return the same numbers.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from dsdreg import kernels
from dsdreg import simulation as sim
from dsdreg._accel import HAS_NUMBA
from dsdreg.solver import build_stacked_arrays, solve_constrained_ls


def _nnls_case(rng, m=100, p=3):
    cx = rng.uniform(-5, 5, (m, p))
    rx = rng.uniform(0, 3, (m, p))
    cy = cx @ rng.uniform(-1, 2, p) + rng.normal(0, 0.5, m)
    ry = rx @ rng.uniform(0, 2, p) + rng.uniform(0, 0.2, m)
    sys = build_stacked_arrays(cy, ry, cx, rx)
    constrained = np.ones(2 * p + 1, dtype=bool)
    constrained[-1] = False
    return sys.design, sys.target, constrained


def bench(label, fn_numba, fn_numpy, number, check):
    out = {}
    for name, fn in (("numba", fn_numba), ("numpy", fn_numpy)):
        if name == "numba" and not HAS_NUMBA:
            continue
        res = fn()  # warm-up / compile
        t = min(timeit.repeat(fn, number=number, repeat=3)) / number
        out[name] = (t, res)
    if "numba" in out:
        agree = check(out["numba"][1], out["numpy"][1])
        speed = out["numpy"][0] / out["numba"][0]
        print(f"{label:<28} numba {out['numba'][0] * 1e6:10.1f} us   numpy {out['numpy'][0] * 1e6:10.1f} us"
              f"   speedup {speed:5.2f}x   agree={agree}")
    else:
        print(f"{label:<28} numpy {out['numpy'][0] * 1e6:10.1f} us   (numba not installed)")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=50, help="calls per timing sample")
    args = ap.parse_args()
    rng = np.random.default_rng(12345)

    A, b, c = _nnls_case(rng)
    bench(
        "nnls_free (m=100, p=3)",
        lambda: kernels.nnls_free(A, b, c, 70, use_numba=True),
        lambda: kernels.nnls_free(A, b, c, 70, use_numba=False),
        args.repeat,
        lambda x, y: bool(np.allclose(x[0], y[0], rtol=1e-10, atol=1e-12)),
    )

    U = rng.random((100, 5000))
    bench(
        "row_min_max (100 x 5000)",
        lambda: kernels.row_min_max(U, use_numba=True),
        lambda: kernels.row_min_max(U, use_numba=False),
        args.repeat,
        lambda x, y: bool(np.array_equal(x[0], y[0]) and np.array_equal(x[1], y[1])),
    )

    sysm = build_stacked_arrays(*(lambda m: (b[:m], b[m:] * np.sqrt(3), A[:m, 0:1], A[m:, 0:1] * np.sqrt(3)))(100))
    bench(
        "solve_constrained_ls (p=1)",
        lambda: solve_constrained_ls(sysm, use_numba=True)[0].as_vector(),
        lambda: solve_constrained_ls(sysm, use_numba=False)[0].as_vector(),
        args.repeat,
        lambda x, y: bool(np.allclose(x, y, rtol=1e-10, atol=1e-12)),
    )

    cfg = sim.study1_preset("1SA2", replications=1, sizes=(100,))
    cell, err, m = cfg.cells()[5]
    bench(
        "study replication (m=100)",
        lambda: sim.run_replication(cfg, cell, err, m, 0, use_numba=True).coef,
        lambda: sim.run_replication(cfg, cell, err, m, 0, use_numba=False).coef,
        max(1, args.repeat // 10),
        lambda x, y: bool(np.allclose(x, y, rtol=1e-10, atol=1e-12)),
    )


if __name__ == "__main__":
    main()
