"""Blocked variant of the per-column solver.

Each sweep walks consecutive blocks of thr columns.  Within a block every
column's delta is computed against the same stale residual; the residual is
then corrected once per block with e -= x_block @ deltas.  Smaller thr tracks
the sequential solver more closely; thr equal to the full width is a plain
Jacobi step and can diverge, so sweeps are guarded: if sum(e^2) grows more
than tenfold in one sweep the solve aborts.

Parallelism is across columns inside a block only.  Workers fill disjoint
slots of the delta buffer and each per-column dot is a single sequential
reduction (BLAS pinned to one thread for the whole solve), so the result is
bit-identical for any worker_count.  With thr=1 the block update degenerates
to the sequential solver's column step and the report matches solve_bak
exactly.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from threadpoolctl import threadpool_limits

from .bak import SolveConfig, SolveReport, _column_step, _finish_report, _zero_report
from .core import as_matrix, as_vector, column_norms_sq

# Sweep-over-sweep growth of sum(e^2) beyond this factor aborts the solve.
DIVERGENCE_FACTOR = 10.0


class DivergenceError(RuntimeError):
    """Residual norm grew past the divergence guard; thr is too large."""


@dataclass
class BlockConfig:
    base: SolveConfig = field(default_factory=SolveConfig)
    thr: int = 1            # columns per block
    worker_count: int = 0   # 0 picks the machine default

    def __post_init__(self):
        if self.thr < 1:
            raise ValueError(f"thr must be >= 1, got {self.thr}")
        if self.worker_count < 0:
            raise ValueError(f"worker_count must be >= 0, got {self.worker_count}")


def _deltas_range(x, e, norms2, c0, c1, out, o0):
    # Fill out[o0:] with deltas for columns [c0, c1) against the shared stale
    # residual.  Disjoint output slots per worker; values don't depend on the
    # chunking, so any worker split gives the same bits.
    for k in range(c0, c1):
        n2 = norms2[k]
        if n2 == 0.0:
            out[o0 + k - c0] = 0.0
        else:
            out[o0 + k - c0] = np.dot(x[:, k], e) / n2
    return None


def block_deltas(x, block, e, norms_sq=None):
    """Deltas for one block of columns against a fixed residual.

    block is a (start, stop) index range.  Zero-norm columns get delta 0.
    """
    x = np.asarray(x)
    e = np.asarray(e)
    start, stop = block
    obs, nvars = x.shape
    if not 0 <= start < stop <= nvars:
        raise ValueError(f"bad block range ({start}, {stop}) for {nvars} columns")
    if e.shape != (obs,):
        raise ValueError(f"residual has shape {e.shape}, expected ({obs},)")
    if norms_sq is None:
        norms_sq = np.empty(nvars, dtype=x.dtype)
        for k in range(start, stop):
            c = x[:, k]
            norms_sq[k] = np.dot(c, c)
    out = np.empty(stop - start, dtype=e.dtype)
    _deltas_range(x, e, norms_sq, start, stop, out, 0)
    return out


def _chunk_ranges(j0, j1, workers):
    width = j1 - j0
    n = min(workers, width)
    bounds = np.linspace(j0, j1, n + 1).astype(int)
    return [(int(bounds[i]), int(bounds[i + 1])) for i in range(n) if bounds[i] < bounds[i + 1]]


def _run_block_sweeps(x, e, a, norms2, scratch, deltas, blocks, pool,
                      max_iter, thresh2, history, prev_sq, thr):
    # blocks: (j0, j1, delta_view, chunks); chunks is None on the inline path.
    sweeps = 0
    converged = False
    for _ in range(max_iter):
        for j0, j1, dv, chunks in blocks:
            if j1 - j0 == 1:
                n2 = norms2[j0]
                if n2 != 0.0:
                    _column_step(x, e, a, scratch, j0, n2)
                continue
            if chunks is None:
                _deltas_range(x, e, norms2, j0, j1, dv, 0)
            else:
                futures = [pool.submit(_deltas_range, x, e, norms2, c0, c1, dv, c0 - j0)
                           for c0, c1 in chunks]
                for f in futures:  # barrier before the residual correction
                    f.result()
            a[j0:j1] += dv
            np.matmul(x[:, j0:j1], dv, out=scratch)
            np.subtract(e, scratch, out=e)
        sweeps += 1
        sq = float(np.dot(e, e))
        if history is not None:
            history.append(sq)
        if not np.isfinite(sq) or sq > prev_sq * DIVERGENCE_FACTOR:
            raise DivergenceError(
                f"residual norm grew from {prev_sq:.6g} to {sq:.6g} in one sweep "
                f"with thr={thr}; use a smaller thr")
        prev_sq = sq
        if thresh2 is not None and sq <= thresh2:
            converged = True
            break
    return sweeps, converged


def solve_bakp(x, y, config: BlockConfig | None = None) -> SolveReport:
    """Blocked solve of min ||y - x @ a||.

    Requires 1 <= thr <= vars; blocks are consecutive column ranges, with a
    narrower final block when thr does not divide the width.  Only cyclic
    ordering is supported.  Raises DivergenceError when the guard trips.
    """
    cfg = config if config is not None else BlockConfig()
    if cfg.base.ordering != "cyclic":
        raise ValueError("the blocked solver only supports cyclic ordering")
    x = as_matrix(x)
    obs, nvars = x.shape
    if cfg.thr > nvars:
        raise ValueError(f"thr={cfg.thr} exceeds the number of columns ({nvars})")
    y = as_vector(y, dtype=x.dtype)
    if y.shape[0] != obs:
        raise ValueError(f"y has length {y.shape[0]}, expected {obs}")

    t0 = time.perf_counter()
    ynorm2 = float(np.dot(y, y))
    if ynorm2 == 0.0:
        return _zero_report(obs, nvars, x.dtype, cfg.base.record_history, t0)

    workers = cfg.worker_count if cfg.worker_count > 0 else (os.cpu_count() or 1)
    history = [] if cfg.base.record_history else None
    thresh2 = cfg.base.tol * cfg.base.tol * ynorm2 if cfg.base.tol > 0 else None
    a = np.zeros(nvars, dtype=x.dtype)
    deltas = np.empty(cfg.thr, dtype=x.dtype)

    blocks = []
    needs_pool = False
    for j0 in range(0, nvars, cfg.thr):
        j1 = min(j0 + cfg.thr, nvars)
        chunks = None
        if workers > 1 and j1 - j0 > 1:
            chunks = _chunk_ranges(j0, j1, workers)
            needs_pool = True
        blocks.append((j0, j1, deltas[:j1 - j0], chunks))

    pool = ThreadPoolExecutor(max_workers=workers) if needs_pool else None
    try:
        with threadpool_limits(limits=1, user_api="blas"):
            norms2 = column_norms_sq(x)
            if not norms2.any():
                raise ValueError("every column of x has zero norm; nothing to solve")
            e = y.copy()
            scratch = np.empty_like(e)
            sweeps, converged = _run_block_sweeps(
                x, e, a, norms2, scratch, deltas, blocks, pool,
                cfg.base.max_iter, thresh2, history, ynorm2, cfg.thr)
            return _finish_report(x, y, a, e, history, sweeps, converged, ynorm2, t0)
    finally:
        if pool is not None:
            pool.shutdown()
