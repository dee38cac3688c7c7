"""Command-line interface: ``dsdreg {fit,predict,compare,loo,study,dataset}``.

Every command writes plain CSV or ``key = value`` text, to ``--out`` or stdout.
Outputs depend only on the inputs and the seed, so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import io as dio
from . import simulation as sim
from .baselines import BaselineMethod, fit_baseline, predict_baseline_arrays
from .interval import SymbolicTable
from .metrics import fit_report
from .model import fit as fit_dsd
from .model import predict_bounds_arrays
from .solver import DsdCoefficients

METHODS = ("dsd", "cm", "minmax", "crm", "ccrm")


class CliError(Exception):
    pass


# ---------------------------------------------------------------- helpers


def resolve_table_path(arg: str):
    """A file path, or the name of a bundled dataset (with or without ``.csv``)."""
    p = Path(arg)
    if p.exists():
        return p
    stem = p.name[:-4] if p.name.endswith(".csv") else p.name
    if stem in dio.DATASETS:
        return dio.dataset_path(stem)
    raise CliError(f"table file {arg!r} not found (bundled datasets: {', '.join(dio.DATASETS)})")


def load_variables(arg: str) -> dio.VariableFile:
    ref = resolve_table_path(arg)
    return dio.parse_variables(ref.read_text(encoding="utf-8"), str(arg))


def _split(s: str | None):
    return None if s is None else [x.strip() for x in s.split(",") if x.strip()]


def load_table(arg: str, response: str | None, predictors: str | None) -> SymbolicTable:
    vf = load_variables(arg)
    response = response if response is not None else vf.names[0]
    preds = _split(predictors)
    if preds is None:
        # derived copies of the response (e.g. Y next to LNY) are not predictors
        preds = [n for n in vf.names if n != response and not _same_family(n, response)]
    return vf.table(response, preds)


def _same_family(a: str, b: str) -> bool:
    return a == "LN" + b or b == "LN" + a


def fit_method(method: str, table: SymbolicTable):
    """Return ``(model, predicted lowers, predicted uppers, omega or None)``."""
    L = np.column_stack([v.lowers for v in table.explicatives])
    U = np.column_stack([v.uppers for v in table.explicatives])
    if method == "dsd":
        model = fit_dsd(table)
        return model, model.fitted.lowers, model.fitted.uppers, model.omega
    model = fit_baseline(BaselineMethod.parse(method), table)
    lo, hi = predict_baseline_arrays(model, L, U)
    return model, lo, hi, None


def describe(model) -> str:
    """Compact equation text for reports."""
    f = dio.fmt_model_float
    if hasattr(model, "coefficients"):
        b = model.coefficients
        parts = [f"gamma={f(b.gamma)}"]
        for n, a, be in zip(model.predictor_names, b.alphas, b.betas):
            parts += [f"alpha_{n}={f(a)}", f"beta_{n}={f(be)}"]
        return ";".join(parts)
    parts = []
    for key in ("center_fit", "range_fit", "lower_fit", "upper_fit"):
        fit = getattr(model, key)
        if fit is not None:
            parts.append(f"{key[:-4]}=" + ",".join(f(v) for v in fit.as_vector()))
    return ";".join(parts)


def _csv(rows: Sequence[Sequence]) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for r in rows:
        w.writerow([dio.fmt_float(c) if isinstance(c, (float, np.floating)) else c for c in r])
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _opt(v):
    return "" if v is None else float(v)


# ---------------------------------------------------------------- commands


def cmd_fit(args) -> None:
    table = load_table(args.table, args.response, args.predictors)
    model, lo, hi, om = fit_method(args.method, table)
    rep = fit_report(table.response, (np.asarray(lo), np.asarray(hi)), om)
    _emit(dio.format_kv(dio.model_to_kv(model, table.response.name, m=table.m)), args.out)
    if args.report:
        _emit(
            _csv([
                ["method", "response", "m", "omega", "rmse_m", "rmse_l", "rmse_u"],
                [args.method, table.response.name, table.m, _opt(om), rep.rmse_m, rep.rmse_l, rep.rmse_u],
            ]),
            args.report,
        )


def cmd_predict(args) -> None:
    model = dio.read_model(args.model)
    vf = load_variables(args.table)
    cols = [vf.variable(n) for n in model.predictors]
    L = np.column_stack([c.lowers for c in cols])
    U = np.column_stack([c.uppers for c in cols])
    lo, hi = model.predict_arrays(L, U)
    rows = [["unit", f"{model.response}_lb", f"{model.response}_ub", "valid"]]
    for lab, a, b in zip(vf.unit_labels, lo, hi):
        rows.append([lab, float(a), float(b), "yes" if a <= b else "no"])
    _emit(_csv(rows), args.out)


def cmd_compare(args) -> None:
    table = load_table(args.table, args.response, args.predictors)
    rows = [["method", "omega", "rmse_m", "rmse_l", "rmse_u", "model"]]
    for method in METHODS:
        model, lo, hi, om = fit_method(method, table)
        rep = fit_report(table.response, (np.asarray(lo), np.asarray(hi)), om)
        rows.append([method, _opt(om), rep.rmse_m, rep.rmse_l, rep.rmse_u, describe(model)])
    _emit(_csv(rows), args.out)


def cmd_loo(args) -> None:
    table = load_table(args.table, args.response, args.predictors)
    if table.m < 3:
        raise CliError(f"leave-one-out needs at least 3 units, got {table.m}")
    name = table.response.name
    rows = [["unit", f"{name}_lb", f"{name}_ub", "pred_lb", "pred_ub"]]
    for j, lab in enumerate(table.unit_labels):
        sub = table.drop(j)
        try:
            model, _, _, _ = fit_method(args.method, sub)
        except Exception as exc:
            raise CliError(f"fit without unit {lab!r} failed: {exc}") from exc
        L = np.array([[v.lower for v in table.row(j)]])
        U = np.array([[v.upper for v in table.row(j)]])
        if args.method == "dsd":
            lo, hi = predict_bounds_arrays(model.coefficients, L, U)
        else:
            lo, hi = predict_baseline_arrays(model, L, U)
        obs = table.response[j]
        rows.append([lab, obs.lower, obs.upper, float(lo[0]), float(hi[0])])
    _emit(_csv(rows), args.out)


def study_config_from_kv(kv: dict[str, str], replications: int | None, seed: int | None) -> sim.StudyConfig:
    """Build a study from a flat config.

    Keys: ``study`` (I or II), ``table`` (a preset such as 1SA2 or 4SA3),
    ``variability`` (Study II presets: low, high, mixed), ``sizes``,
    ``replications``, ``seed``, ``microdata_count``. Without ``table`` the design
    is given by ``truth`` (alpha1,beta1,...,gamma), ``variability`` (one level per
    predictor) and either ``errors`` (``a:b`` pairs separated by ``;``, Study I)
    or ``linearity`` (Study II).
    """
    kv = dict(kv)
    study = kv.pop("study", "I").upper()
    reps = int(kv.pop("replications", "1000"))
    sd = int(kv.pop("seed", "0"))
    if replications is not None:
        reps = replications
    if seed is not None:
        sd = seed
    md = int(kv.pop("microdata_count", "5000"))
    sizes = tuple(int(s) for s in kv.pop("sizes").split(",")) if "sizes" in kv else None
    table = kv.pop("table", None)
    variability = kv.pop("variability", None)
    if table is not None:
        if study == "I":
            cfg = sim.study1_preset(table, reps, sd, sizes or sim.STUDY1_SIZES, md)
        else:
            lin = tuple(kv.pop("linearity", "high,low").split(","))
            cfg = sim.study2_preset(table, variability or sim.LOW, reps, sd, sizes or sim.STUDY2_SIZES, lin, md)
    else:
        try:
            truth = DsdCoefficients.from_vector([float(v) for v in kv.pop("truth").split(",")])
        except KeyError:
            raise CliError("study config needs either 'table' or 'truth'") from None
        levels = (variability or sim.LOW).split(",")
        if len(levels) == 1:
            levels = levels * truth.p
        var = tuple(sim.VariabilitySpec.preset(lv.strip(), k, md) for k, lv in enumerate(levels))
        if study == "I":
            errs = tuple(
                sim.ErrorSpec(*(float(x) for x in e.split(":"))) for e in kv.pop("errors", "0:0").split(";")
            )
        else:
            errs = tuple(s.strip() for s in kv.pop("linearity", "high,low").split(","))
        default = sim.STUDY1_SIZES if study == "I" else sim.STUDY2_SIZES
        cfg = sim.StudyConfig(study, truth, var, errs, sizes or default, reps, sd, name="custom")
    kv.pop("workers", None)
    if kv:
        raise CliError(f"unknown study config keys: {sorted(kv)}")
    return cfg


def cmd_study(args) -> None:
    path = Path(args.config)
    kv = dio.parse_kv(path.read_text(encoding="utf-8"), str(path))
    workers = int(kv["workers"]) if "workers" in kv else args.workers
    cfg = study_config_from_kv(kv, args.replications, args.seed)
    report = sim.run_study(cfg, workers=workers)
    _emit(_csv([report.columns(), *report.rows()]), args.out)


def cmd_dataset(args) -> None:
    _emit(dio.dataset_path(args.name).read_text(encoding="utf-8"), args.out)


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dsdreg", description="Interval-valued regression with the DSD model.")
    sub = ap.add_subparsers(dest="command", required=True)

    def table_opts(p, method=True):
        p.add_argument("table", help="interval CSV file or bundled dataset name")
        p.add_argument("--response", help="response variable (default: first variable)")
        p.add_argument("--predictors", help="comma-separated predictors (default: all others)")
        if method:
            p.add_argument("--method", choices=METHODS, default="dsd")
        p.add_argument("--out", help="output file (default: stdout)")

    p = sub.add_parser("fit", help="fit one model and write it as key = value text")
    table_opts(p)
    p.add_argument("--report", help="also write a one-row fit report CSV here")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="predict bounds for every unit of a table")
    p.add_argument("model")
    p.add_argument("table")
    p.add_argument("--out")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("compare", help="fit all five methods and tabulate goodness of fit")
    table_opts(p, method=False)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("loo", help="leave-one-out predictions")
    table_opts(p)
    p.set_defaults(func=cmd_loo)

    p = sub.add_parser("study", help="run a simulation study from a key = value config")
    p.add_argument("--config", required=True)
    p.add_argument("--replications", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, help="process count (default: DSDREG_STUDY_WORKERS or 1)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("dataset", help="print a bundled dataset")
    p.add_argument("name", choices=dio.DATASETS)
    p.add_argument("--out")
    p.set_defaults(func=cmd_dataset)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (CliError, ValueError, KeyError, RuntimeError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"dsdreg {args.command}: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
