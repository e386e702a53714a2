"""Sequential per-column least-squares solver.

Each update takes one column, computes da = <col, e> / <col, col> against the
current residual e, subtracts da * col from e, and adds da to that column's
coefficient.  Every update shrinks sum(e^2) by exactly da^2 * <col, col> in
exact arithmetic, so the per-sweep residual history is non-increasing.

Determinism: the whole solve runs under a single BLAS thread, so every dot
reduction has a fixed order and results are reproducible run to run.  The
residual is maintained incrementally and recomputed from scratch once at the
end; if the two disagree by more than DRIFT_TOL relative to the target norm,
the report carries a drift warning.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from threadpoolctl import threadpool_limits

from .core import as_matrix, as_vector, axpy_sub, column_norms_sq, rng_for

ORDERINGS = ("cyclic", "random")

# Maintained-vs-recomputed residual disagreement, relative to ||y||, above
# which the report is flagged.
DRIFT_TOL = 1e-4


@dataclass
class SolveConfig:
    max_iter: int = 1000          # sweep budget
    tol: float = 1e-6             # relative residual ||e|| / ||y||; 0 disables
    ordering: str = "cyclic"      # column visit order per sweep
    ordering_seed: int = 0        # seed for ordering="random"
    record_history: bool = False  # keep per-sweep sum(e^2)

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.tol < 0:
            raise ValueError(f"tol must be >= 0, got {self.tol}")
        if self.ordering not in ORDERINGS:
            raise ValueError(f"unknown ordering {self.ordering!r}, expected one of {ORDERINGS}")


@dataclass
class SolveReport:
    a_hat: np.ndarray                       # estimated coefficients
    residual: np.ndarray                    # y - x @ a_hat, recomputed from scratch
    residual_norm_history: list | None      # per-sweep sum(e^2); None unless recorded
    sweeps_run: int
    converged: bool
    wall_time: float                        # seconds, measured inside the solver
    drift_warning: bool = False


def residual_norm(e) -> float:
    """sum(e^2), the squared norm tracked once per sweep (not the root)."""
    e = np.asarray(e)
    return float(np.dot(e, e))


def coordinate_update(col, e):
    """One least-squares update along a single column.

    Returns (da, e_next) with da = <col, e> / <col, col> and
    e_next = e - da * col.  A zero-norm column is the skip condition:
    da = 0.0 and e is returned unchanged.
    """
    col = np.asarray(col)
    e = np.asarray(e)
    n2 = np.dot(col, col)
    if n2 == 0.0:
        return 0.0, e
    da = np.dot(col, e) / n2
    return float(da), axpy_sub(e, col, da)


def _column_step(x, e, a, scratch, j, n2):
    # The single-column update both solvers share; the blocked solver runs
    # exactly this for width-1 blocks so the two stay bit-identical there.
    col = x[:, j]
    da = np.dot(col, e) / n2
    np.multiply(col, da, out=scratch)
    np.subtract(e, scratch, out=e)
    a[j] += da


def _run_sweeps(x, e, a, norms2, scratch, order, shuffle_rng, max_iter, thresh2, history):
    # Hot loop: no heap allocation per iteration beyond interpreter scalars
    # (asserted in the test suite).  scratch holds da * col transiently.
    sweeps = 0
    converged = False
    for _ in range(max_iter):
        if shuffle_rng is not None:
            shuffle_rng.shuffle(order)
        for j in order:
            n2 = norms2[j]
            if n2 == 0.0:
                continue
            _column_step(x, e, a, scratch, j, n2)
        sweeps += 1
        sq = float(np.dot(e, e))
        if history is not None:
            history.append(sq)
        if thresh2 is not None and sq <= thresh2:
            converged = True
            break
    return sweeps, converged


def _zero_report(obs, nvars, dtype, record_history, t0):
    # ||y|| = 0: the solution is identically zero, no sweeps needed.
    return SolveReport(
        a_hat=np.zeros(nvars, dtype=dtype),
        residual=np.zeros(obs, dtype=dtype),
        residual_norm_history=[] if record_history else None,
        sweeps_run=0,
        converged=True,
        wall_time=time.perf_counter() - t0,
    )


def _finish_report(x, y, a, e, history, sweeps, converged, ynorm2, t0, wall=None):
    # Recompute the residual from scratch for the report and flag incremental
    # drift beyond DRIFT_TOL relative to ||y||.
    resid = y - x @ a
    if wall is None:
        wall = time.perf_counter() - t0
    drift = np.linalg.norm((e - resid).astype(np.float64))
    drift_rel = drift / max(np.sqrt(ynorm2), np.finfo(np.float64).tiny)
    return SolveReport(
        a_hat=a,
        residual=resid,
        residual_norm_history=history,
        sweeps_run=sweeps,
        converged=converged,
        wall_time=wall,
        drift_warning=bool(drift_rel > DRIFT_TOL),
    )


def solve_bak(x, y, config: SolveConfig | None = None, a0=None) -> SolveReport:
    """Solve min ||y - x @ a|| by repeated single-column updates.

    Parameters
    ----------
    x : (obs, vars) matrix; coerced to column-major float storage if needed.
    y : (obs,) target vector.
    config : SolveConfig; defaults apply when omitted.
    a0 : optional warm-start coefficients (copied, never written).

    Columns with zero norm are skipped and their coefficients stay at the
    starting value.  A zero target returns a = 0 immediately, converged.
    Convergence is checked once per sweep against tol * ||y||.
    """
    cfg = config if config is not None else SolveConfig()
    x = as_matrix(x)
    obs, nvars = x.shape
    y = as_vector(y, dtype=x.dtype)
    if y.shape[0] != obs:
        raise ValueError(f"y has length {y.shape[0]}, expected {obs}")

    t0 = time.perf_counter()
    ynorm2 = float(np.dot(y, y))
    if ynorm2 == 0.0:
        return _zero_report(obs, nvars, x.dtype, cfg.record_history, t0)

    if a0 is not None:
        a = as_vector(a0, dtype=x.dtype).copy()
        if a.shape[0] != nvars:
            raise ValueError(f"a0 has length {a.shape[0]}, expected {nvars}")
    else:
        a = np.zeros(nvars, dtype=x.dtype)

    history = [] if cfg.record_history else None
    order = np.arange(nvars)
    shuffle_rng = rng_for(cfg.ordering_seed) if cfg.ordering == "random" else None
    thresh2 = cfg.tol * cfg.tol * ynorm2 if cfg.tol > 0 else None

    with threadpool_limits(limits=1, user_api="blas"):
        norms2 = column_norms_sq(x)
        if not norms2.any():
            raise ValueError("every column of x has zero norm; nothing to solve")
        if a0 is not None:
            e = y - x @ a
        else:
            e = y.copy()
        scratch = np.empty_like(e)
        sweeps, converged = _run_sweeps(
            x, e, a, norms2, scratch, order, shuffle_rng, cfg.max_iter, thresh2, history)
        return _finish_report(x, y, a, e, history, sweeps, converged, ynorm2, t0)
