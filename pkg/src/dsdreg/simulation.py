"""Synthetic interval tables and the two Monte-Carlo factorial studies.

Explicative intervals are the hull of ``microdata_count`` uniform draws on a
random support ``(d_lo, d_hi)``. Responses come from the noiseless model output
``Y*`` disturbed by a random affine error ``a_j + (2t - 1) b_j``; ``|b_j|`` is
capped by ``mr = min_j r_{Y*(j)}`` so that no half-range turns negative.

Every replication draws from its own Philox stream keyed by
``(seed, cell index, replication index)``, so results do not depend on how
replications are scheduled across workers.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import kernels
from .interval import DomainError, IntervalVariable
from .metrics import mse_params
from .solver import DsdCoefficients, build_stacked_arrays, solve_constrained_ls

LOW, HIGH, MIXED = "low", "high", "mixed"

# (lower-bound support, upper-bound support) for the random hull edges
_MIXED_OPTIONS = (
    ((-2.0, 0.0), (0.0, 2.0)),
    ((-1.0, 1.0), (2.0, 4.0)),
    ((-3.0, -1.0), (9.0, 11.0)),
    ((-11.0, -9.0), (29.0, 31.0)),
    ((-1.0, 1.0), (19.0, 21.0)),
)
_STUDY2_LOW = (
    ((-2.0, 0.0), (4.0, 6.0)),
    ((1.0, 3.0), (3.0, 5.0)),
    ((4.0, 6.0), (9.0, 11.0)),
)
_STUDY2_HIGH = (
    ((-14.0, -12.0), (16.0, 18.0)),
    ((1.0, 3.0), (25.0, 27.0)),
    ((-16.0, -14.0), (-1.0, 1.0)),
)


@dataclass(frozen=True)
class VariabilitySpec:
    """How one explicative variable's intervals are generated.

    ``options`` lists ``((lo_a, lo_b), (hi_a, hi_b))`` support pairs; each unit
    picks one uniformly at random (a single option for low/high variability).
    """

    level: str
    options: tuple[tuple[tuple[float, float], tuple[float, float]], ...]
    microdata_count: int = 5000

    def __post_init__(self) -> None:
        if self.level not in (LOW, HIGH, MIXED):
            raise DomainError(f"unknown variability level {self.level!r}")
        if not self.options:
            raise DomainError("variability spec needs at least one support option")
        for (la, lb), (ha, hb) in self.options:
            if not (la <= lb <= ha <= hb):
                raise DomainError(f"support option {((la, lb), (ha, hb))} can produce invalid intervals")
        if self.microdata_count < 2:
            raise DomainError(f"microdata_count must be >= 2, got {self.microdata_count}")

    @classmethod
    def preset(cls, level: str, k: int = 0, microdata_count: int = 5000) -> "VariabilitySpec":
        """Support ranges used for predictor ``k`` (0-based) in the published designs.

        Study I uses the ``k = 0`` entries.
        """
        if level == LOW:
            opts = (_STUDY2_LOW[k],)
        elif level == HIGH:
            opts = (_STUDY2_HIGH[k],)
        elif level == MIXED:
            opts = _MIXED_OPTIONS
        else:
            raise DomainError(f"unknown variability level {level!r}")
        return cls(level, opts, microdata_count)


@dataclass(frozen=True)
class ErrorSpec:
    """Uniform error scales: ``a ~ U(-a_scale, a_scale)``, ``b ~ U(-b_eff, b_eff)``
    with ``b_eff = min(b_scale, mr)``."""

    a_scale: float
    b_scale: float

    def __post_init__(self) -> None:
        if self.a_scale < 0 or self.b_scale < 0:
            raise DomainError(f"error scales must be non-negative, got {self.a_scale}, {self.b_scale}")

    def effective_b(self, mr: float) -> float:
        return min(self.b_scale, mr)

    @property
    def label(self) -> str:
        return f"a={_fmt(self.a_scale)};b={_fmt(self.b_scale)}"

    @classmethod
    def for_linearity(cls, level: str, lowers, uppers) -> "ErrorSpec":
        """Scales derived from the noiseless response bounds.

        Low linearity uses ``a_scale = (ml + mu) / 2`` and ``b_scale = mr``;
        high linearity uses one eighth of each.
        """
        lowers = np.asarray(lowers, dtype=float)
        uppers = np.asarray(uppers, dtype=float)
        ml = abs(float(lowers.min()))
        mu = abs(float(uppers.max()))
        mr = float(np.min((uppers - lowers) / 2.0))
        if level == LOW:
            f = 1.0
        elif level == HIGH:
            f = 1.0 / 8.0
        else:
            raise DomainError(f"unknown linearity level {level!r}")
        return cls(f * (ml + mu) / 2.0, f * mr)


def _fmt(v: float) -> str:
    return repr(float(v)).rstrip("0").rstrip(".") if float(v) != int(v) else str(int(v))


def make_rng(seed: int, cell: int = 0, rep: int = 0) -> np.random.Generator:
    """Counter-based generator for one replication of one design cell."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(cell), int(rep)))
    return np.random.Generator(np.random.Philox(ss))


# ---------------------------------------------------------------- generators


def gen_explicative_bounds(spec: VariabilitySpec, m: int, rng: np.random.Generator, use_numba=None):
    """Array form of :func:`gen_explicative`: returns ``(lowers, uppers)``."""
    if len(spec.options) == 1:
        choice = np.zeros(m, dtype=np.int64)
    else:
        choice = rng.integers(0, len(spec.options), size=m)
    opts = np.array(spec.options, dtype=float)  # (n_opt, 2, 2)
    lo_sup = opts[choice, 0, :]
    hi_sup = opts[choice, 1, :]
    d_lo = lo_sup[:, 0] + (lo_sup[:, 1] - lo_sup[:, 0]) * rng.random(m)
    d_hi = hi_sup[:, 0] + (hi_sup[:, 1] - hi_sup[:, 0]) * rng.random(m)
    # the hull of uniform draws on (d_lo, d_hi) is the affine image of the hull of U(0,1) draws
    u_min, u_max = kernels.row_min_max(rng.random((m, spec.microdata_count)), use_numba=use_numba)
    width = d_hi - d_lo
    return d_lo + width * u_min, d_lo + width * u_max


def gen_explicative(spec: VariabilitySpec, m: int, rng: np.random.Generator, name: str = "X") -> IntervalVariable:
    lo, hi = gen_explicative_bounds(spec, m, rng)
    return IntervalVariable.from_bounds(name, lo, hi)


def noiseless_response(truth: DsdCoefficients, cx: np.ndarray, rx: np.ndarray):
    """Centers and half-ranges of the undisturbed model output."""
    cx = np.atleast_2d(cx)
    rx = np.atleast_2d(rx)
    a = np.asarray(truth.alphas)
    b = np.asarray(truth.betas)
    return cx @ (a - b) + truth.gamma, rx @ (a + b)


def disturb(c_star, r_star, a, b):
    """Apply per-unit errors; ``b`` must satisfy ``|b_j| <= r_star_j``."""
    c = np.asarray(c_star, dtype=float) + np.asarray(a, dtype=float)
    r = np.asarray(r_star, dtype=float) + np.asarray(b, dtype=float)
    # |b| <= mr <= r_star, so r >= 0 up to rounding
    return c, np.maximum(r, 0.0)


def draw_errors(error: ErrorSpec, r_star: np.ndarray, rng: np.random.Generator):
    m = r_star.size
    mr = float(np.min(r_star))
    b_eff = error.effective_b(mr)
    a = rng.uniform(-error.a_scale, error.a_scale, size=m) if error.a_scale > 0 else np.zeros(m)
    b = rng.uniform(-b_eff, b_eff, size=m) if b_eff > 0 else np.zeros(m)
    return a, b


def gen_response(
    truth: DsdCoefficients,
    predictors: Sequence[IntervalVariable],
    error: ErrorSpec,
    rng: np.random.Generator,
    name: str = "Y",
) -> IntervalVariable:
    if len(predictors) != truth.p:
        raise DomainError(f"{len(predictors)} predictors for p={truth.p} coefficients")
    cx = np.column_stack([v.centers for v in predictors])
    rx = np.column_stack([v.half_ranges for v in predictors])
    c_star, r_star = noiseless_response(truth, cx, rx)
    a, b = draw_errors(error, r_star, rng)
    c, r = disturb(c_star, r_star, a, b)
    return IntervalVariable.from_centers(name, c, r)


# ---------------------------------------------------------------- studies


@dataclass(frozen=True)
class StudyConfig:
    """One factorial design: every error cell crossed with every sample size.

    ``errors`` holds :class:`ErrorSpec` cells (Study I) or linearity levels
    ``"low"``/``"high"`` (Study II).
    """

    study: str
    truth: DsdCoefficients
    variability: tuple[VariabilitySpec, ...]
    errors: tuple[ErrorSpec | str, ...]
    sizes: tuple[int, ...]
    replications: int = 1000
    seed: int = 0
    name: str = ""

    def __post_init__(self) -> None:
        if self.study not in ("I", "II"):
            raise DomainError(f"study must be 'I' or 'II', got {self.study!r}")
        if self.replications < 1:
            raise DomainError("replications must be >= 1")
        if len(self.variability) != self.truth.p:
            raise DomainError(f"{len(self.variability)} variability specs for p={self.truth.p}")
        if not self.errors or not self.sizes:
            raise DomainError("a study needs at least one error cell and one sample size")
        for e in self.errors:
            if isinstance(e, str) and e not in (LOW, HIGH):
                raise DomainError(f"unknown linearity level {e!r}")
        if any(m < 2 for m in self.sizes):
            raise DomainError(f"sample sizes must be >= 2, got {self.sizes}")

    @property
    def p(self) -> int:
        return self.truth.p

    def cells(self) -> list[tuple[int, ErrorSpec | str, int]]:
        """``(cell index, error, m)`` in report order."""
        out = []
        for i, e in enumerate(self.errors):
            for j, m in enumerate(self.sizes):
                out.append((i * len(self.sizes) + j, e, m))
        return out


@dataclass(frozen=True)
class Replicate:
    coef: np.ndarray
    omega: float
    rmse_m: float
    rmse_l: float
    rmse_u: float


def run_replication(config: StudyConfig, cell: int, error, m: int, rep: int, use_numba=None) -> Replicate:
    rng = make_rng(config.seed, cell, rep)
    p = config.p
    L = np.empty((m, p))
    U = np.empty((m, p))
    for k, spec in enumerate(config.variability):
        L[:, k], U[:, k] = gen_explicative_bounds(spec, m, rng, use_numba)
    cx = (L + U) / 2.0
    rx = (U - L) / 2.0
    c_star, r_star = noiseless_response(config.truth, cx, rx)
    if isinstance(error, str):
        error = ErrorSpec.for_linearity(error, c_star - r_star, c_star + r_star)
    a, b = draw_errors(error, r_star, rng)
    cy, ry = disturb(c_star, r_star, a, b)

    coef, _ = solve_constrained_ls(build_stacked_arrays(cy, ry, cx, rx), use_numba=use_numba)
    x = coef.as_vector()
    al, be = x[0:-1:2], x[1:-1:2]
    pc = cx @ (al - be) + coef.gamma
    pr = rx @ (al + be)

    ybar = math.fsum(cy) / m
    total = math.fsum((cy - ybar) ** 2) + math.fsum(ry**2) / 3.0
    explained = math.fsum((pc - ybar) ** 2) + math.fsum(pr**2) / 3.0
    resid = math.fsum((cy - pc) ** 2) + math.fsum((ry - pr) ** 2) / 3.0
    omega = explained / total if total > 0 else float("nan")
    return Replicate(
        coef=x,
        omega=omega,
        rmse_m=math.sqrt(resid / m),
        rmse_l=math.sqrt(math.fsum(((cy - ry) - (pc - pr)) ** 2) / m),
        rmse_u=math.sqrt(math.fsum(((cy + ry) - (pc + pr)) ** 2) / m),
    )


def _mean_sd(values: Sequence[float]) -> tuple[float, float]:
    n = len(values)
    mean = math.fsum(values) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var)


@dataclass(frozen=True)
class CellResult:
    study: str
    cell: int
    error: str
    m: int
    replications: int
    omega_mean: float
    omega_sd: float
    rmse_m_mean: float
    rmse_m_sd: float
    rmse_l_mean: float
    rmse_l_sd: float
    rmse_u_mean: float
    rmse_u_sd: float
    param_names: tuple[str, ...]
    param_mean: tuple[float, ...]
    param_sd: tuple[float, ...]
    param_mse: tuple[float, ...]


@dataclass(frozen=True)
class StudyReport:
    config: StudyConfig
    cells: tuple[CellResult, ...] = field(default_factory=tuple)

    def find(self, error, m: int) -> CellResult:
        label = error.label if isinstance(error, ErrorSpec) else f"linearity={error}"
        for c in self.cells:
            if c.error == label and c.m == m:
                return c
        raise KeyError((label, m))

    def columns(self) -> list[str]:
        cols = [
            "study", "cell", "error", "m", "replications",
            "omega_mean", "omega_sd", "rmse_m_mean", "rmse_m_sd",
        ]
        if self.config.study == "II":
            for n in self.cells[0].param_names if self.cells else ():
                cols += [f"{n}_mean", f"{n}_sd", f"{n}_mse"]
            cols += ["rmse_l_mean", "rmse_l_sd", "rmse_u_mean", "rmse_u_sd"]
        return cols

    def rows(self) -> list[list]:
        out = []
        for c in self.cells:
            row = [c.study, c.cell, c.error, c.m, c.replications,
                   c.omega_mean, c.omega_sd, c.rmse_m_mean, c.rmse_m_sd]
            if self.config.study == "II":
                for mean, sd, mse in zip(c.param_mean, c.param_sd, c.param_mse):
                    row += [mean, sd, mse]
                row += [c.rmse_l_mean, c.rmse_l_sd, c.rmse_u_mean, c.rmse_u_sd]
            out.append(row)
        return out


def param_names(p: int) -> tuple[str, ...]:
    if p == 1:
        return ("alpha", "beta", "gamma")
    names = []
    for k in range(1, p + 1):
        names += [f"alpha{k}", f"beta{k}"]
    return tuple(names) + ("gamma",)


def _aggregate(config: StudyConfig, cell: int, error, m: int, reps: Sequence[Replicate]) -> CellResult:
    om = _mean_sd([r.omega for r in reps])
    rm = _mean_sd([r.rmse_m for r in reps])
    rl = _mean_sd([r.rmse_l for r in reps])
    ru = _mean_sd([r.rmse_u for r in reps])
    E = np.array([r.coef for r in reps])
    means, sds = zip(*(_mean_sd(list(E[:, k])) for k in range(E.shape[1])))
    mse = mse_params([DsdCoefficients.from_vector(r.coef) for r in reps], config.truth).as_vector()
    label = error.label if isinstance(error, ErrorSpec) else f"linearity={error}"
    return CellResult(
        study=config.study, cell=cell, error=label, m=m, replications=len(reps),
        omega_mean=om[0], omega_sd=om[1], rmse_m_mean=rm[0], rmse_m_sd=rm[1],
        rmse_l_mean=rl[0], rmse_l_sd=rl[1], rmse_u_mean=ru[0], rmse_u_sd=ru[1],
        param_names=param_names(config.p), param_mean=tuple(means), param_sd=tuple(sds),
        param_mse=tuple(float(v) for v in mse),
    )


def _run_cell(args):
    config, cell, error, m, use_numba = args
    return [run_replication(config, cell, error, m, r, use_numba) for r in range(config.replications)]


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("DSDREG_STUDY_WORKERS", "1")))
    except ValueError:
        return 1


def run_study(config: StudyConfig, workers: int | None = None, use_numba=None) -> StudyReport:
    """Run every cell of ``config``; cells are farmed out to ``workers`` processes."""
    workers = default_workers() if workers is None else max(1, int(workers))
    jobs = [(config, cell, e, m, use_numba) for cell, e, m in config.cells()]
    if workers == 1 or len(jobs) == 1:
        results = [_run_cell(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_run_cell, jobs))
    cells = tuple(
        _aggregate(config, cell, e, m, reps) for (cell, e, m), reps in zip(config.cells(), results)
    )
    return StudyReport(config, cells)


def run_study1(config: StudyConfig, **kw) -> StudyReport:
    if config.study != "I":
        raise DomainError("run_study1 needs a Study I configuration")
    return run_study(config, **kw)


def run_study2(config: StudyConfig, **kw) -> StudyReport:
    if config.study != "II":
        raise DomainError("run_study2 needs a Study II configuration")
    return run_study(config, **kw)


# ---------------------------------------------------------------- presets

_T_I = DsdCoefficients.single(2, 1, -1)
_T_II = DsdCoefficients.single(6, 0, 2)
_T_III = DsdCoefficients.single(2, 8, 3)
_T_P3_I = DsdCoefficients((2, 0.5, 1.5), (1, 3, 1), -1)
_T_P3_II = DsdCoefficients((6, 2, 10), (0, 8, 5), 3)

# table -> (truth, variability, a scales, b scales)
_STUDY1_TABLES = {
    "1SA2": (_T_I, LOW, (0, 2, 5, 10, 20), (0, 2, 5, 10)),
    "2SA2": (_T_II, LOW, (0, 5, 10, 20, 40), (0, 2, 5, 10)),
    "3SA2": (_T_III, LOW, (0, 5, 10, 20, 40), (0, 5, 10, 20)),
    "4SA2": (_T_I, HIGH, (0, 10, 20, 40, 80), (0, 10, 20, 40)),
    "5SA2": (_T_II, HIGH, (0, 20, 40, 80, 120), (0, 20, 40, 80)),
    "6SA2": (_T_III, HIGH, (0, 20, 40, 80, 160), (0, 40, 80, 120)),
    "7SA2": (_T_I, MIXED, (0, 5, 10, 20, 40), (0, 1, 2)),
    "8SA2": (_T_II, MIXED, (0, 20, 40, 80, 120), (0, 2, 4)),
    "9SA2": (_T_III, MIXED, (0, 20, 40, 80, 160), (0, 3, 6)),
}
_STUDY2_TABLES = {
    "1SA3": _T_I,
    "2SA3": _T_III,
    "3SA3": _T_II,
    "4SA3": _T_P3_I,
    "5SA3": _T_P3_I,
    "6SA3": _T_P3_II,
    "7SA3": _T_P3_II,
}
STUDY1_SIZES = (10, 100)
STUDY2_SIZES = (10, 30, 100, 250)


def study1_preset(table: str, replications: int = 1000, seed: int = 0, sizes=STUDY1_SIZES,
                  microdata_count: int = 5000) -> StudyConfig:
    truth, level, a_scales, b_scales = _STUDY1_TABLES[table]
    errors = tuple(ErrorSpec(a, b) for a in a_scales for b in b_scales)
    return StudyConfig(
        "I", truth, (VariabilitySpec.preset(level, 0, microdata_count),), errors,
        tuple(sizes), replications, seed, name=table,
    )


def study2_preset(table: str, variability: str, replications: int = 1000, seed: int = 0,
                  sizes=STUDY2_SIZES, linearity=(HIGH, LOW), microdata_count: int = 5000) -> StudyConfig:
    truth = _STUDY2_TABLES[table]
    var = tuple(VariabilitySpec.preset(variability, k, microdata_count) for k in range(truth.p))
    return StudyConfig(
        "II", truth, var, tuple(linearity), tuple(sizes), replications, seed,
        name=f"{table}/{variability}",
    )


def with_replications(config: StudyConfig, replications: int) -> StudyConfig:
    return replace(config, replications=replications)


STUDY1_TABLES = tuple(_STUDY1_TABLES)
STUDY2_TABLES = tuple(_STUDY2_TABLES)
