"""Matrix file formats: CSV (one row per observation) and a raw binary dump.

Binary layout: a 16-byte little-endian header (magic "BAKM", u32 rows,
u32 cols, u32 precision tag: 32 or 64) followed by the scalars in
column-major order.  Binary round-trips are bit-identical.  CSV carries
decimal text and always loads as double precision.
"""

from __future__ import annotations

import struct

import numpy as np

from .core import as_matrix

MAGIC = b"BAKM"
_HEADER = struct.Struct("<4sIII")
_TAG_TO_DTYPE = {32: np.dtype(np.float32), 64: np.dtype(np.float64)}
_DTYPE_TO_TAG = {v: k for k, v in _TAG_TO_DTYPE.items()}

FORMATS = ("csv", "binary")


class MatrixFormatError(ValueError):
    """Unreadable or inconsistent matrix file content."""


def save_matrix(path, x, format="binary"):
    """Write a matrix; binary preserves bits, CSV keeps full decimal precision."""
    x = as_matrix(x)
    if format == "binary":
        with open(path, "wb") as f:
            f.write(_HEADER.pack(MAGIC, x.shape[0], x.shape[1], _DTYPE_TO_TAG[x.dtype]))
            f.write(x.tobytes(order="F"))
    elif format == "csv":
        np.savetxt(path, x, delimiter=",", fmt="%.17g")
    else:
        raise ValueError(f"unknown format {format!r}, expected one of {FORMATS}")


def _load_binary(path):
    with open(path, "rb") as f:
        head = f.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise MatrixFormatError(f"{path}: truncated header")
        magic, rows, cols, tag = _HEADER.unpack(head)
        if magic != MAGIC:
            raise MatrixFormatError(f"{path}: bad magic {magic!r}")
        if tag not in _TAG_TO_DTYPE:
            raise MatrixFormatError(f"{path}: unknown precision tag {tag}")
        dtype = _TAG_TO_DTYPE[tag]
        body = f.read(rows * cols * dtype.itemsize)
    if len(body) != rows * cols * dtype.itemsize:
        raise MatrixFormatError(f"{path}: expected {rows * cols} scalars, file is short")
    flat = np.frombuffer(body, dtype=dtype).copy()
    return flat.reshape((rows, cols), order="F")


def _load_csv(path):
    data = []
    ncols = None
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if ncols is None:
                ncols = len(parts)
            elif len(parts) != ncols:
                raise MatrixFormatError(
                    f"{path}: row {lineno} has {len(parts)} values, expected {ncols}")
            try:
                data.append([float(p) for p in parts])
            except ValueError:
                raise MatrixFormatError(f"{path}: row {lineno} has a non-numeric value") from None
    if not data:
        raise MatrixFormatError(f"{path}: no rows")
    return np.asfortranarray(np.array(data, dtype=np.float64))


def load_matrix(path, format=None):
    """Read a matrix; format=None sniffs binary by its magic, else CSV."""
    if format is None:
        with open(path, "rb") as f:
            format = "binary" if f.read(4) == MAGIC else "csv"
    if format == "binary":
        return _load_binary(path)
    if format == "csv":
        return _load_csv(path)
    raise ValueError(f"unknown format {format!r}, expected one of {FORMATS}")


def load_vector(path, format=None):
    """Read a single-column (or single-row) matrix file as a vector."""
    m = load_matrix(path, format)
    if m.shape[1] == 1 or m.shape[0] == 1:
        return np.ascontiguousarray(m).reshape(-1)
    raise MatrixFormatError(f"{path}: expected a vector, got shape {m.shape}")
