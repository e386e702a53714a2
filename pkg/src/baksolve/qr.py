"""Dense least squares by Householder QR, plus a normal-equations cross-check.

The QR path is the reference the iterative solvers are measured against: it
factors the matrix with explicit Householder reflections (no pivoting) and
back-substitutes.  Rank handling is deliberately simple: diagonal entries of R
at or below the tolerance mark dependent columns, whose coefficients are set
to zero (a basic solution, not the minimum-norm one).

normal_equations_solve goes through the Gram matrix and a Cholesky
factorization instead; it exists so tests can check the two independent
routes against each other.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .core import as_matrix, as_vector


@dataclass
class QRFactors:
    """Packed factorization: R in the upper triangle of `packed`, reflector
    tails below the diagonal (each reflector v is scaled to a leading 1, with
    strength tau), and the diagonal of R copied out for rank checks."""

    packed: np.ndarray
    tau: np.ndarray
    r_diag: np.ndarray


@dataclass
class QRSolution:
    coeffs: np.ndarray
    rank: int
    rank_deficient: bool


def default_rank_tol(m, n, r_diag) -> float:
    scale = float(np.max(np.abs(r_diag))) if r_diag.size else 0.0
    return max(m, n) * float(np.finfo(r_diag.dtype).eps) * scale


def _reflect_sweep(w, ncols):
    # In-place Householder sweep over the first ncols columns of w; any extra
    # columns (e.g. an appended target) just receive the reflections.
    m = w.shape[0]
    k = min(m, ncols)
    tau = np.zeros(k, dtype=w.dtype)
    one = w.dtype.type(1)
    two = w.dtype.type(2)
    for j in range(k):
        col = w[j:, j]
        nrm = np.sqrt(np.dot(col, col))
        if nrm == 0.0:
            continue  # identity reflector, r_jj = 0
        alpha = col[0]
        beta = -np.copysign(nrm, alpha)
        v0 = alpha - beta
        vt = w[j + 1:, j]
        vt /= v0
        tau[j] = two / (one + np.dot(vt, vt))
        w[j, j] = beta
        if j + 1 < w.shape[1]:
            s = w[j, j + 1:] + vt @ w[j + 1:, j + 1:]
            s *= tau[j]
            w[j, j + 1:] -= s
            w[j + 1:, j + 1:] -= np.outer(vt, s)
    return tau


def qr_factor(x) -> QRFactors:
    """Householder QR of a copy of x, packed LAPACK-style."""
    x = as_matrix(x)
    w = np.array(x, order="F", copy=True)
    tau = _reflect_sweep(w, w.shape[1])
    k = tau.shape[0]
    return QRFactors(packed=w, tau=tau, r_diag=w.diagonal()[:k].copy())


def qr_least_squares(x, y, rank_tol=None) -> QRSolution:
    """Least-squares solve via Householder QR on the augmented matrix [x | y].

    Dependent columns (|r_jj| <= tolerance) and, for wide systems, columns
    past the row count get coefficient zero; the solution is flagged
    rank-deficient whenever rank < vars.  The default tolerance is
    max(obs, vars) * eps * max|r_diag|.
    """
    x = as_matrix(x)
    m, n = x.shape
    y = as_vector(y, dtype=x.dtype)
    if y.shape[0] != m:
        raise ValueError(f"y has length {y.shape[0]}, expected {m}")

    w = np.empty((m, n + 1), dtype=x.dtype, order="F")
    w[:, :n] = x
    w[:, n] = y
    _reflect_sweep(w, n)
    k = min(m, n)
    r_diag = w.diagonal()[:k]
    tol = default_rank_tol(m, n, r_diag) if rank_tol is None else float(rank_tol)
    rank = int(np.count_nonzero(np.abs(r_diag) > tol))

    a = np.zeros(n, dtype=x.dtype)
    qty = w[:, n]
    for j in reversed(range(k)):
        rjj = w[j, j]
        if abs(rjj) <= tol:
            continue  # dependent column, coefficient stays zero
        a[j] = (qty[j] - np.dot(w[j, j + 1:n], a[j + 1:])) / rjj
    return QRSolution(coeffs=a, rank=rank, rank_deficient=rank < n)


def normal_equations_solve(x, y) -> np.ndarray:
    """Solve via the Gram matrix and Cholesky; test oracle, not a fast path.

    Raises scipy's LinAlgError when x.T @ x is not positive definite.
    """
    x = as_matrix(x)
    y = as_vector(y, dtype=x.dtype)
    if y.shape[0] != x.shape[0]:
        raise ValueError(f"y has length {y.shape[0]}, expected {x.shape[0]}")
    gram = x.T @ x
    rhs = x.T @ y
    return cho_solve(cho_factor(gram), rhs)
