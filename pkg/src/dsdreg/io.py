"""Interval table CSV format, model files and the bundled datasets.

Table files are CSV with a header. Column 1 holds the unit label and every
interval variable ``V`` contributes an adjacent ``V_lb, V_ub`` column pair.
Floats are written with the shortest representation that round-trips exactly,
so ``read_table(write_table(t))`` reproduces ``t`` bit for bit.
"""

from __future__ import annotations

import csv
import io as _io
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .baselines import AffineFit, BaselineMethod, BaselineModel
from .interval import DomainError, IntervalVariable, SymbolicTable, log_shift_transform
from .solver import DsdCoefficients


class TableFormatError(ValueError):
    """A table file violates the interval CSV format."""


def fmt_float(v: float) -> str:
    """Shortest exact decimal form of ``v`` (lossless, locale-independent)."""
    v = float(v)
    if not math.isfinite(v):
        raise DomainError(f"cannot serialise non-finite value {v}")
    if v == 0.0:
        return "0"
    s = repr(v)
    return s[:-2] if s.endswith(".0") else s


def fmt_model_float(v: float) -> str:
    """17 significant digits, as used in model files."""
    return format(float(v), ".17g")


# ---------------------------------------------------------------- tables


@dataclass(frozen=True)
class VariableFile:
    """Everything a table file holds: labels plus every interval variable, in file order."""

    unit_labels: tuple[str, ...]
    variables: tuple[IntervalVariable, ...]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def variable(self, name: str) -> IntervalVariable:
        for v in self.variables:
            if v.name == name:
                return v
        raise DomainError(f"no variable {name!r}; available: {list(self.names)}")

    def table(self, response: str, predictors: Sequence[str] | None = None) -> SymbolicTable:
        """Build a table; ``predictors=None`` takes every other variable."""
        y = self.variable(response)
        if predictors is None:
            predictors = [n for n in self.names if n != response]
        if response in predictors:
            raise DomainError(f"{response!r} is both response and predictor")
        return SymbolicTable(self.unit_labels, y, tuple(self.variable(n) for n in predictors))


def _parse_header(header: list[str], source: str) -> list[str]:
    if len(header) < 3 or (len(header) - 1) % 2:
        raise TableFormatError(
            f"{source}: header must be a label column followed by _lb/_ub pairs, got {header}"
        )
    names = []
    for k in range(1, len(header), 2):
        lb, ub = header[k].strip(), header[k + 1].strip()
        if not lb.endswith("_lb") or not ub.endswith("_ub") or lb[:-3] != ub[:-3] or not lb[:-3]:
            raise TableFormatError(
                f"{source}: columns {k + 1} and {k + 2} ({lb!r}, {ub!r}) are not a V_lb, V_ub pair"
            )
        names.append(lb[:-3])
    if len(set(names)) != len(names):
        raise TableFormatError(f"{source}: duplicated variable names in header {names}")
    return names


def parse_variables(text: str, source: str = "<string>") -> VariableFile:
    rows = list(csv.reader(_io.StringIO(text)))
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise TableFormatError(f"{source}: empty file")
    names = _parse_header(rows[0], source)
    width = len(rows[0])
    labels: list[str] = []
    lows = [[] for _ in names]
    highs = [[] for _ in names]
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise TableFormatError(f"{source}: row {i} has {len(row)} cells, header has {width}")
        labels.append(row[0].strip())
        for k, name in enumerate(names):
            cells = []
            for col in (2 * k + 1, 2 * k + 2):
                raw = row[col].strip()
                try:
                    v = float(raw)
                except ValueError:
                    raise TableFormatError(
                        f"{source}: row {i}, column {rows[0][col]!r}: non-numeric cell {raw!r}"
                    ) from None
                if not math.isfinite(v):
                    raise TableFormatError(f"{source}: row {i}, column {rows[0][col]!r}: non-finite value")
                cells.append(v)
            if cells[0] > cells[1]:
                raise TableFormatError(
                    f"{source}: row {i} ({labels[-1]!r}), variable {name!r}: "
                    f"lower bound {cells[0]} exceeds upper bound {cells[1]}"
                )
            lows[k].append(cells[0])
            highs[k].append(cells[1])
    if not labels:
        raise TableFormatError(f"{source}: no data rows")
    if len(set(labels)) != len(labels):
        dup = sorted({u for u in labels if labels.count(u) > 1})
        raise TableFormatError(f"{source}: duplicated unit labels {dup}")
    variables = tuple(IntervalVariable.from_bounds(n, lo, hi) for n, lo, hi in zip(names, lows, highs))
    return VariableFile(tuple(labels), variables)


def read_variables(path) -> VariableFile:
    path = Path(path)
    return parse_variables(path.read_text(encoding="utf-8"), str(path))


def read_table(path, response: str | None = None, predictors: Sequence[str] | None = None) -> SymbolicTable:
    """Read a table file. ``response`` defaults to the first variable."""
    vf = read_variables(path)
    return vf.table(response if response is not None else vf.names[0], predictors)


def format_variables(labels: Sequence[str], variables: Sequence[IntervalVariable]) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["unit"]
    for v in variables:
        header += [f"{v.name}_lb", f"{v.name}_ub"]
    w.writerow(header)
    for j, lab in enumerate(labels):
        row = [lab]
        for v in variables:
            row += [fmt_float(v[j].lower), fmt_float(v[j].upper)]
        w.writerow(row)
    return buf.getvalue()


def write_table(table: SymbolicTable, path) -> None:
    Path(path).write_text(
        format_variables(table.unit_labels, (table.response, *table.explicatives)), encoding="utf-8"
    )


# ---------------------------------------------------------------- key = value files


def parse_kv(text: str, source: str = "<string>") -> dict[str, str]:
    out: dict[str, str] = {}
    for i, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise TableFormatError(f"{source}: line {i} is not 'key = value': {line!r}")
        k, v = (s.strip() for s in line.split("=", 1))
        if k in out:
            raise TableFormatError(f"{source}: line {i} repeats key {k!r}")
        out[k] = v
    return out


def format_kv(items: Mapping[str, object]) -> str:
    return "".join(f"{k} = {v}\n" for k, v in items.items())


def _floats(s: str) -> tuple[float, ...]:
    return tuple(float(x) for x in s.split(",")) if s.strip() else ()


def _join(vals) -> str:
    return ",".join(fmt_model_float(v) for v in vals)


def model_to_kv(model, response: str, omega: float | None = None, m: int | None = None) -> dict[str, str]:
    """Serialise a DSD coefficient set or a :class:`BaselineModel`."""
    if isinstance(model, DsdCoefficients):
        raise DomainError("pass a fitted model, not bare coefficients")
    from .model import FittedDsdModel

    if isinstance(model, FittedDsdModel):
        b = model.coefficients
        return {
            "method": "dsd",
            "response": model.response_name,
            "predictors": ",".join(model.predictor_names),
            "m": str(model.m),
            "p": str(model.p),
            "alpha": _join(b.alphas),
            "beta": _join(b.betas),
            "gamma": fmt_model_float(b.gamma),
            "omega": fmt_model_float(model.omega),
        }
    if isinstance(model, BaselineModel):
        kv = {
            "method": model.method.value.lower(),
            "response": response,
            "predictors": ",".join(model.predictor_names),
            "m": "" if m is None else str(m),
            "p": str(model.p),
        }
        for key in ("center_fit", "range_fit", "lower_fit", "upper_fit"):
            f = getattr(model, key)
            if f is not None:
                kv[key] = _join(f.as_vector())
        return kv
    raise DomainError(f"cannot serialise {type(model).__name__}")


@dataclass(frozen=True)
class LoadedModel:
    """A model read back from disk: either DSD coefficients or a baseline."""

    method: str
    response: str
    predictors: tuple[str, ...]
    dsd: DsdCoefficients | None = None
    baseline: BaselineModel | None = None
    omega: float | None = None

    def predict_arrays(self, lowers: np.ndarray, uppers: np.ndarray):
        if self.dsd is not None:
            from .model import predict_bounds_arrays

            return predict_bounds_arrays(self.dsd, lowers, uppers)
        from .baselines import predict_baseline_arrays

        return predict_baseline_arrays(self.baseline, lowers, uppers)


def kv_to_model(kv: Mapping[str, str], source: str = "<model>") -> LoadedModel:
    try:
        method = kv["method"]
        response = kv["response"]
        predictors = tuple(s for s in kv["predictors"].split(",") if s)
        p = int(kv["p"])
    except KeyError as exc:
        raise TableFormatError(f"{source}: missing key {exc.args[0]!r}") from None
    if len(predictors) != p:
        raise TableFormatError(f"{source}: p={p} but {len(predictors)} predictor names")
    if method == "dsd":
        coef = DsdCoefficients(_floats(kv["alpha"]), _floats(kv["beta"]), float(kv["gamma"]))
        if coef.p != p:
            raise TableFormatError(f"{source}: coefficient count does not match p={p}")
        om = float(kv["omega"]) if kv.get("omega") else None
        return LoadedModel(method, response, predictors, dsd=coef, omega=om)
    bm = BaselineMethod.parse(method)
    fits = {}
    for key in ("center_fit", "range_fit", "lower_fit", "upper_fit"):
        if key in kv:
            v = _floats(kv[key])
            if len(v) != p + 1:
                raise TableFormatError(f"{source}: {key} has {len(v)} values, expected {p + 1}")
            fits[key] = AffineFit(v[0], v[1:])
    return LoadedModel(method, response, predictors, baseline=BaselineModel(bm, predictors, **fits))


def write_model(model, path, response: str, m: int | None = None) -> None:
    Path(path).write_text(format_kv(model_to_kv(model, response, m=m)), encoding="utf-8")


def read_model(path) -> LoadedModel:
    path = Path(path)
    return kv_to_model(parse_kv(path.read_text(encoding="utf-8"), str(path)), str(path))


# ---------------------------------------------------------------- bundled data

DATASETS = ("unemployment", "forestfires_monthly")
LNY_SHIFT = 2.0


def dataset_path(name: str):
    if name not in DATASETS:
        raise DomainError(f"unknown dataset {name!r}; available: {list(DATASETS)}")
    return resources.files("dsdreg.datasets").joinpath(f"{name}.csv")


def load_dataset_variables(name: str) -> VariableFile:
    ref = dataset_path(name)
    return parse_variables(ref.read_text(encoding="utf-8"), f"{name}.csv")


def load_unemployment(log_response: bool = True, printed_typo: bool = False) -> SymbolicTable:
    """Unemployment time (Y) against time worked before unemployment (X), 58 classes.

    With ``log_response`` the response is ``ln(Y + 2)`` computed from the raw Y
    bounds at load time (the stored LNY columns serve as an audit copy).
    ``printed_typo`` restores the unit ``FxLxA3xB`` X lower bound to the value
    29 as it appears in print; see ``PROVENANCE.md``.
    """
    vf = load_dataset_variables("unemployment")
    y = vf.variable("Y")
    x = vf.variable("X")
    if printed_typo:
        j = vf.unit_labels.index("FxLxA3xB")
        lo = x.lowers.copy()
        lo[j] = 29.0
        x = IntervalVariable.from_bounds("X", lo, x.uppers)
    if log_response:
        y = log_shift_transform(y, LNY_SHIFT, name="LNY", unit_labels=vf.unit_labels)
    return SymbolicTable(vf.unit_labels, y, (x,))


def load_forestfires() -> SymbolicTable:
    """Monthly burned-area intervals (LNarea) against temp, wind and rh."""
    return load_dataset_variables("forestfires_monthly").table("LNarea", ["temp", "wind", "rh"])
