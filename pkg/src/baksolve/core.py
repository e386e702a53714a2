"""Dense column-major storage, level-1 kernels, and synthetic system generation.

Matrices are plain numpy arrays in Fortran (column-major) order so that a
column is a contiguous, zero-copy view.  Two precisions are supported:
"single" (float32) and "double" (float64).  All randomness goes through
numpy's Philox generator, a counter-based PRNG whose streams are
bit-reproducible across platforms for a given seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from threadpoolctl import threadpool_limits

PRECISION_DTYPES = {"single": np.float32, "double": np.float64}

DISTRIBUTIONS = ("uniform", "normal")


def precision_dtype(precision):
    """Map a precision name ("single" or "double") to a numpy dtype."""
    try:
        return PRECISION_DTYPES[precision]
    except KeyError:
        raise ValueError(f"unknown precision {precision!r}, expected one of "
                         f"{sorted(PRECISION_DTYPES)}") from None


def precision_of(arr) -> str:
    for name, dt in PRECISION_DTYPES.items():
        if arr.dtype == dt:
            return name
    raise ValueError(f"unsupported dtype {arr.dtype}")


def rng_for(seed: int) -> np.random.Generator:
    # Philox: counter-based, platform-independent streams.
    return np.random.Generator(np.random.Philox(seed))


def as_matrix(obj, precision=None) -> np.ndarray:
    """Coerce to a 2-d column-major array of a supported float dtype.

    Copies only when the input is not already Fortran-ordered float32/float64.
    """
    dtype = precision_dtype(precision) if precision is not None else None
    x = np.asarray(obj, dtype=dtype)
    if x.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got ndim={x.ndim}")
    if x.dtype not in (np.float32, np.float64):
        x = x.astype(np.float64)
    return np.asfortranarray(x)


def as_vector(obj, dtype=None) -> np.ndarray:
    v = np.ascontiguousarray(obj, dtype=dtype)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-d vector, got ndim={v.ndim}")
    if v.dtype not in (np.float32, np.float64):
        v = v.astype(np.float64)
    return v


def column_view(x, j: int) -> np.ndarray:
    """Zero-copy view of column j of a column-major matrix."""
    cols = x.shape[1]
    if not 0 <= j < cols:
        raise IndexError(f"column index {j} out of range for {cols} columns")
    return x[:, j]


def dot(u, v) -> float:
    """Inner product of two equal-length vectors.

    One fused reduction per call; the accumulation order depends only on the
    vector length, never on any solver-level threading, so results are
    reproducible run to run (see solver notes on BLAS pinning).
    """
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != v.shape or u.ndim != 1:
        raise ValueError(f"length mismatch: {u.shape} vs {v.shape}")
    return float(np.dot(u, v))


def axpy_sub(e, col, da, out=None):
    """Return e - da * col.

    With out= given, writes there and allocates nothing; out must not alias e
    (it may alias col).  Callers that update a residual in place keep a
    scratch buffer and pass it here.
    """
    e = np.asarray(e)
    col = np.asarray(col)
    if e.shape != col.shape or e.ndim != 1:
        raise ValueError(f"length mismatch: {e.shape} vs {col.shape}")
    if out is None:
        out = np.empty_like(e)
    elif out is e:
        raise ValueError("out must not alias e")
    np.multiply(col, da, out=out)
    np.subtract(e, out, out=out)
    return out


def matvec(x, a, out=None):
    """Matrix-vector product x @ a."""
    if x.shape[1] != np.shape(a)[0]:
        raise ValueError(f"dimension mismatch: {x.shape} @ {np.shape(a)}")
    return np.matmul(x, a, out=out)


def column_norms_sq(x) -> np.ndarray:
    """Per-column squared Euclidean norms.

    Computed with the same per-column dot as the solvers so the values agree
    bit for bit with what a coordinate update would recompute.
    """
    cols = x.shape[1]
    out = np.empty(cols, dtype=x.dtype)
    for j in range(cols):
        c = x[:, j]
        out[j] = np.dot(c, c)
    return out


@dataclass
class SystemSpec:
    """Parameters of a synthetic linear system y = x @ a_true + noise."""

    obs: int
    vars: int
    seed: int = 0
    distribution: str = "uniform"        # matrix entries: uniform(-1,1) or standard normal
    coeff_distribution: str = "uniform"  # true coefficients, same choices
    noise_sigma: float = 0.0

    def __post_init__(self):
        if self.obs < 1 or self.vars < 1:
            raise ValueError(f"obs and vars must be positive, got {self.obs}x{self.vars}")
        for field in (self.distribution, self.coeff_distribution):
            if field not in DISTRIBUTIONS:
                raise ValueError(f"unknown distribution {field!r}, expected one of {DISTRIBUTIONS}")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")


class GeneratedSystem(NamedTuple):
    x: np.ndarray       # (obs, vars), column-major
    y: np.ndarray       # (obs,)
    a_true: np.ndarray  # (vars,)


def _draw(rng, n, distribution, dtype):
    if distribution == "uniform":
        u = rng.random(n, dtype=dtype)
        u *= dtype(2)
        u -= dtype(1)
        return u
    return rng.standard_normal(n, dtype=dtype)


def generate_system(spec: SystemSpec, precision="double") -> GeneratedSystem:
    """Draw a synthetic system; same spec and precision give bit-identical output.

    The matrix is drawn as one flat stream and viewed column-major, so column
    j holds draws [j*obs, (j+1)*obs).  y is formed in the target precision.
    The matvec runs under a single BLAS thread so the result does not depend
    on the ambient thread configuration.
    """
    dtype = precision_dtype(precision)
    rng = rng_for(spec.seed)
    flat = _draw(rng, spec.obs * spec.vars, spec.distribution, dtype)
    x = flat.reshape((spec.obs, spec.vars), order="F")
    a_true = _draw(rng, spec.vars, spec.coeff_distribution, dtype)
    with threadpool_limits(limits=1, user_api="blas"):
        y = x @ a_true
    if spec.noise_sigma > 0:
        noise = rng.standard_normal(spec.obs, dtype=dtype)
        noise *= dtype(spec.noise_sigma)
        y += noise
    return GeneratedSystem(x, y, a_true)
