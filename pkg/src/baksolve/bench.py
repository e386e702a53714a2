"""Benchmark harness: run solvers on generated or loaded systems, time them,
and emit accuracy records.

A case runs its solver `repetitions` times and keeps the minimum wall time
(generation and metrics excluded).  Accuracy metrics are computed in double
precision regardless of the solve precision: single-precision predictions
would bury the solver's own error under metric rounding.  MAPE excludes
entries of the base vector at or below a small floor; when everything is
excluded it falls back to mean absolute error and says so.
"""

from __future__ import annotations

import csv
import importlib.resources
import time
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .bak import SolveConfig, solve_bak
from .bakp import BlockConfig, DivergenceError, solve_bakp
from .core import SystemSpec, generate_system, precision_dtype
from .matio import load_matrix, save_matrix
from .qr import qr_least_squares

SOLVERS = ("bak", "bakp", "qr")
MAPE_BASES = ("targets", "coeffs")
MAPE_FLOOR = 1e-12

REPORT_HEADER = ("case_id", "obs", "vars", "solver", "thr", "wall_time_s",
                 "sweeps", "mape", "rel_residual", "speedup_vs_qr")


class SuiteFormatError(ValueError):
    """Malformed benchmark suite file."""


class MapeResult(NamedTuple):
    value: float
    fallback: bool  # True when every base entry sat below the floor


def mape(y_pred, y_true, floor=MAPE_FLOOR) -> MapeResult:
    """Mean absolute percentage error with a small-denominator floor.

    Entries where |y_true| <= floor are excluded from the mean; if that
    excludes everything the result is the plain mean absolute error and the
    fallback flag is set.
    """
    y_pred = np.asarray(y_pred, dtype=np.float64)
    y_true = np.asarray(y_true, dtype=np.float64)
    if y_pred.shape != y_true.shape or y_pred.ndim != 1:
        raise ValueError(f"length mismatch: {y_pred.shape} vs {y_true.shape}")
    err = np.abs(y_pred - y_true)
    base = np.abs(y_true)
    mask = base > floor
    if not mask.any():
        return MapeResult(float(err.mean()), True)
    return MapeResult(float(np.mean(err[mask] / base[mask])), False)


@dataclass
class RunSpec:
    """One benchmark case: a system source plus solver settings."""

    case_id: str
    solver: str
    system: SystemSpec | str   # generated spec, or a matrix file whose last column is y
    precision: str = "single"  # benchmark default; tests use double
    thr: int = 50
    workers: int = 0
    tol: float = 1e-6
    max_iter: int = 1000
    repetitions: int = 10      # wall time is the minimum across these
    mape_base: str = "targets"

    def __post_init__(self):
        if self.solver not in SOLVERS:
            raise ValueError(f"unknown solver {self.solver!r}, expected one of {SOLVERS}")
        if self.repetitions < 1:
            raise ValueError(f"repetitions must be >= 1, got {self.repetitions}")
        if self.mape_base not in MAPE_BASES:
            raise ValueError(f"unknown mape base {self.mape_base!r}, expected one of {MAPE_BASES}")


@dataclass
class BenchmarkRecord:
    case_id: str
    obs: int
    vars: int
    solver: str
    thr: int                 # 0 unless the blocked solver ran
    precision: str
    wall_time_s: float
    sweeps: int
    mape: float
    rel_residual: float
    seed: int
    workers: int = 0
    mape_fallback: bool = False
    converged: bool = False
    failed: bool = False
    error: str = ""


def _predict_f64(x, a):
    # Double-precision prediction without duplicating a large single-precision
    # matrix: upcast a column block at a time.
    a64 = np.asarray(a, dtype=np.float64)
    if x.dtype == np.float64:
        return x @ a64
    obs, nvars = x.shape
    pred = np.zeros(obs, dtype=np.float64)
    step = 64
    for j0 in range(0, nvars, step):
        j1 = min(j0 + step, nvars)
        pred += x[:, j0:j1].astype(np.float64) @ a64[j0:j1]
    return pred


def _acquire_system(spec: RunSpec):
    if isinstance(spec.system, SystemSpec):
        x, y, a_true = generate_system(spec.system, spec.precision)
        return x, a_true, y, spec.system.seed
    m = load_matrix(spec.system)
    if m.shape[1] < 2:
        raise ValueError(f"{spec.system}: need at least 2 columns (matrix plus target)")
    dtype = precision_dtype(spec.precision)
    x = np.asfortranarray(m[:, :-1].astype(dtype, copy=False))
    y = np.ascontiguousarray(m[:, -1].astype(dtype, copy=False))
    return x, None, y, 0


def run_case(spec: RunSpec, dump_coeffs=None) -> BenchmarkRecord:
    """Run one case; deterministic apart from wall_time_s.

    Solver divergence does not raise: the record comes back failed with the
    error message attached and NaN metrics.
    """
    x, a_true, y, seed = _acquire_system(spec)
    obs, nvars = x.shape
    record = BenchmarkRecord(
        case_id=spec.case_id, obs=obs, vars=nvars, solver=spec.solver,
        thr=spec.thr if spec.solver == "bakp" else 0,
        precision=spec.precision, wall_time_s=float("nan"), sweeps=0,
        mape=float("nan"), rel_residual=float("nan"), seed=seed,
        workers=spec.workers if spec.solver == "bakp" else 0)

    walls = []
    a_hat = None
    try:
        for _ in range(spec.repetitions):
            if spec.solver == "qr":
                t0 = time.perf_counter()
                sol = qr_least_squares(x, y)
                walls.append(time.perf_counter() - t0)
                a_hat = sol.coeffs
                record.sweeps = 0
                record.converged = True
            else:
                cfg = SolveConfig(max_iter=spec.max_iter, tol=spec.tol)
                if spec.solver == "bak":
                    rep = solve_bak(x, y, cfg)
                else:
                    rep = solve_bakp(x, y, BlockConfig(base=cfg, thr=spec.thr,
                                                       worker_count=spec.workers))
                walls.append(rep.wall_time)
                a_hat = rep.a_hat
                record.sweeps = rep.sweeps_run
                record.converged = rep.converged
    except DivergenceError as exc:
        record.failed = True
        record.error = str(exc)
        return record

    record.wall_time_s = min(walls)
    pred = _predict_f64(x, a_hat)
    y64 = y.astype(np.float64)
    ynorm = np.linalg.norm(y64)
    resid_norm = np.linalg.norm(y64 - pred)
    record.rel_residual = float(resid_norm / ynorm) if ynorm > 0 else float(resid_norm)
    if spec.mape_base == "coeffs":
        if a_true is None:
            raise ValueError("mape_base='coeffs' needs a generated system with known coefficients")
        m = mape(a_hat, a_true)
    else:
        m = mape(pred, y)
    record.mape = m.value
    record.mape_fallback = m.fallback
    if dump_coeffs is not None:
        save_matrix(dump_coeffs, np.asarray(a_hat).reshape(-1, 1), format="binary")
    return record


# Suite files: CSV with these columns.  Only the first five are required.
_SUITE_REQUIRED = ("case_id", "solver", "obs", "vars", "seed")
_SUITE_DEFAULTS = {
    "precision": "single",
    "thr": "50",
    "workers": "0",
    "tol": "1e-6",
    "max_iter": "1000",
    "reps": "10",
    "noise_sigma": "0",
    "distribution": "uniform",
    "coeff_distribution": "uniform",
    "mape_base": "targets",
}


def _suite_value(row, field, line, path, convert):
    raw = (row.get(field) or "").strip() or _SUITE_DEFAULTS.get(field, "")
    if raw == "":
        raise SuiteFormatError(f"{path} line {line}: missing field '{field}'")
    try:
        return convert(raw)
    except ValueError:
        raise SuiteFormatError(
            f"{path} line {line}: bad value {raw!r} in field '{field}'") from None


def parse_suite(path) -> list[RunSpec]:
    """Parse a suite CSV into RunSpecs; errors carry the line number."""
    specs = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None:
            return []
        header = [h.strip() for h in reader.fieldnames]
        for field in _SUITE_REQUIRED:
            if field not in header:
                raise SuiteFormatError(f"{path} line 1: missing column '{field}'")
        for row in reader:
            row = {(k or "").strip(): v for k, v in row.items() if k is not None}
            if not any((v or "").strip() for v in row.values()):
                continue
            line = reader.line_num
            solver = _suite_value(row, "solver", line, path, str)
            if solver not in SOLVERS:
                raise SuiteFormatError(
                    f"{path} line {line}: unknown solver {solver!r} in field 'solver'")
            system = SystemSpec(
                obs=_suite_value(row, "obs", line, path, int),
                vars=_suite_value(row, "vars", line, path, int),
                seed=_suite_value(row, "seed", line, path, int),
                distribution=_suite_value(row, "distribution", line, path, str),
                coeff_distribution=_suite_value(row, "coeff_distribution", line, path, str),
                noise_sigma=_suite_value(row, "noise_sigma", line, path, float),
            )
            specs.append(RunSpec(
                case_id=_suite_value(row, "case_id", line, path, str),
                solver=solver,
                system=system,
                precision=_suite_value(row, "precision", line, path, str),
                thr=_suite_value(row, "thr", line, path, int),
                workers=_suite_value(row, "workers", line, path, int),
                tol=_suite_value(row, "tol", line, path, float),
                max_iter=_suite_value(row, "max_iter", line, path, int),
                repetitions=_suite_value(row, "reps", line, path, int),
                mape_base=_suite_value(row, "mape_base", line, path, str),
            ))
    return specs


def run_suite(suite_file, on_record=None) -> list[BenchmarkRecord]:
    """Run every case in a suite file, in order.

    on_record, when given, is called with each record as it completes so
    callers can stream progress.  Cases run sequentially to keep timings
    honest.
    """
    records = []
    for spec in parse_suite(suite_file):
        rec = run_case(spec)
        records.append(rec)
        if on_record is not None:
            on_record(rec)
    return records


def emit_report(records, path):
    """Write records as CSV with the fixed header.

    speedup_vs_qr is qr wall time over the row's wall time, filled only for
    rows whose case_id also has a qr record; other rows leave it empty.
    Failed rows keep their identity columns and leave the metrics empty.
    """
    qr_wall = {r.case_id: r.wall_time_s for r in records
               if r.solver == "qr" and not r.failed}
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        w.writerow(REPORT_HEADER)
        for r in records:
            if r.failed:
                metrics = ["", "", "", ""]
            else:
                metrics = [f"{r.wall_time_s:.6g}", r.sweeps, f"{r.mape:.9g}",
                           f"{r.rel_residual:.9g}"]
            speedup = ""
            partner = qr_wall.get(r.case_id)
            if partner is not None and not r.failed and r.wall_time_s > 0:
                speedup = f"{partner / r.wall_time_s:.6g}"
            w.writerow([r.case_id, r.obs, r.vars, r.solver, r.thr, *metrics, speedup])


def bundled_suite_path() -> Path:
    """Path of the packaged table1_desk suite."""
    return Path(importlib.resources.files(__package__) / "data" / "table1_desk.csv")
