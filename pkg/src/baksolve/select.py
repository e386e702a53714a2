"""Greedy forward feature selection driven by single-column trial updates.

Candidate columns are scored by how far one least-squares update along that
column would drop sum(e^2).  The drop has a closed form, so scoring all
columns takes one dot per column and never materializes a trial residual:

    ||e - x_j * da_j||^2 = ||e||^2 - <x_j, e>^2 / <x_j, x_j>

After each pick the coefficients are refit on the selected submatrix (QR by
default, or the iterative solver warm-started from the previous fit) and the
residual is recomputed from scratch.  stepwise_baseline is the classic
forward-stepwise procedure that refits every candidate in full each step; it
exists as the expensive reference point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bak import SolveConfig, solve_bak
from .core import as_matrix, as_vector, column_norms_sq
from .qr import qr_least_squares

REFITS = ("qr", "bak")


class SelectionExhaustedError(RuntimeError):
    """No admissible column left to score."""


@dataclass
class FeatureSelectConfig:
    max_feat: int
    refit: str = "qr"
    stop_tol: float = 0.0                   # relative residual; 0 disables
    refit_config: SolveConfig | None = None  # used when refit="bak"

    def __post_init__(self):
        if self.max_feat < 1:
            raise ValueError(f"max_feat must be >= 1, got {self.max_feat}")
        if self.refit not in REFITS:
            raise ValueError(f"unknown refit {self.refit!r}, expected one of {REFITS}")
        if self.stop_tol < 0:
            raise ValueError(f"stop_tol must be >= 0, got {self.stop_tol}")


@dataclass
class FeatureSelectionReport:
    selected: list          # column indices in pick order
    residual_norms: list    # sum(e^2) after each refit
    final_coeffs: np.ndarray  # over selected columns, same order


def score_all_columns(x, e, excluded=()):
    """Score every column; returns (best_j, scores).

    scores[j] is the squared residual norm a single update along column j
    would leave.  Excluded and zero-norm columns score +inf.  Ties go to the
    lowest index.  Raises SelectionExhaustedError when nothing is admissible.
    """
    x = np.asarray(x)
    e = np.asarray(e)
    obs, nvars = x.shape
    if e.shape != (obs,):
        raise ValueError(f"residual has shape {e.shape}, expected ({obs},)")

    admissible = np.ones(nvars, dtype=bool)
    excluded = np.asarray(sorted(excluded), dtype=int) if len(excluded) else None
    if excluded is not None:
        admissible[excluded] = False
    norms2 = column_norms_sq(x)
    admissible &= norms2 > 0

    scores = np.full(nvars, np.inf)
    if admissible.any():
        g = x.T @ e  # one dot per column
        e2 = np.dot(e, e)
        adm = np.flatnonzero(admissible)
        scores[adm] = e2 - g[adm] * g[adm] / norms2[adm]
    best = int(np.argmin(scores))
    if not np.isfinite(scores[best]):
        raise SelectionExhaustedError("no non-excluded column with nonzero norm")
    return best, scores


def _submatrix(x, selected):
    # Column-major copy of the selected columns, in pick order.
    xs = np.empty((x.shape[0], len(selected)), dtype=x.dtype, order="F")
    for i, j in enumerate(selected):
        xs[:, i] = x[:, j]
    return xs


def _refit(xs, y, cfg, prev_coeffs):
    if cfg.refit == "qr":
        return qr_least_squares(xs, y).coeffs
    solve_cfg = cfg.refit_config if cfg.refit_config is not None else SolveConfig()
    a0 = np.zeros(xs.shape[1], dtype=xs.dtype)
    if prev_coeffs is not None:
        a0[:prev_coeffs.shape[0]] = prev_coeffs
    return solve_bak(xs, y, solve_cfg, a0=a0).a_hat


def select_features(x, y, cfg: FeatureSelectConfig) -> FeatureSelectionReport:
    """Pick up to cfg.max_feat columns greedily, refitting after each pick.

    Stops early when the relative residual ||e|| / ||y|| drops to
    cfg.stop_tol.  Never picks a zero-norm or already-selected column.
    """
    x = as_matrix(x)
    obs, nvars = x.shape
    y = as_vector(y, dtype=x.dtype)
    if y.shape[0] != obs:
        raise ValueError(f"y has length {y.shape[0]}, expected {obs}")
    if cfg.max_feat > nvars:
        raise ValueError(f"max_feat={cfg.max_feat} exceeds the number of columns ({nvars})")

    ynorm = np.linalg.norm(y.astype(np.float64))
    selected: list[int] = []
    residual_norms: list[float] = []
    coeffs = None
    e = y.copy()
    for _ in range(cfg.max_feat):
        best, _scores = score_all_columns(x, e, excluded=selected)
        selected.append(best)
        xs = _submatrix(x, selected)
        coeffs = _refit(xs, y, cfg, coeffs)
        e = y - xs @ coeffs
        rn = float(np.dot(e, e))
        residual_norms.append(rn)
        if cfg.stop_tol > 0 and ynorm > 0 and np.sqrt(rn) / ynorm <= cfg.stop_tol:
            break
    return FeatureSelectionReport(selected=selected, residual_norms=residual_norms,
                                  final_coeffs=coeffs)


def stepwise_baseline(x, y, max_feat: int) -> FeatureSelectionReport:
    """Classic forward stepwise selection: full QR refit for every candidate.

    Each step solves least squares on selected + {candidate} for all
    candidates and keeps the one with the lowest residual (ties to the lowest
    index).  Deliberately the expensive reference for the greedy selector.
    """
    x = as_matrix(x)
    obs, nvars = x.shape
    y = as_vector(y, dtype=x.dtype)
    if y.shape[0] != obs:
        raise ValueError(f"y has length {y.shape[0]}, expected {obs}")
    if not 1 <= max_feat <= nvars:
        raise ValueError(f"max_feat must be in [1, {nvars}], got {max_feat}")

    norms2 = column_norms_sq(x)
    selected: list[int] = []
    residual_norms: list[float] = []
    coeffs = None
    for _ in range(max_feat):
        best_j = -1
        best_rss = np.inf
        best_coeffs = None
        for j in range(nvars):
            if j in selected or norms2[j] == 0.0:
                continue
            xs = _submatrix(x, selected + [j])
            cand = qr_least_squares(xs, y).coeffs
            r = y - xs @ cand
            rss = float(np.dot(r, r))
            if rss < best_rss:
                best_j, best_rss, best_coeffs = j, rss, cand
        if best_j < 0:
            raise SelectionExhaustedError("no non-excluded column with nonzero norm")
        selected.append(best_j)
        coeffs = best_coeffs
        residual_norms.append(best_rss)
    return FeatureSelectionReport(selected=selected, residual_norms=residual_norms,
                                  final_coeffs=coeffs)
