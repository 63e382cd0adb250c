"""Input validation helpers shared by the functional and estimator APIs."""

from __future__ import annotations

import numpy as np


def as_samples(x, name: str = "samples", min_len: int = 1) -> np.ndarray:
    """Coerce ``x`` to a 1-D float64 array of finite values."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size < min_len:
        raise ValueError(f"{name} must have at least {min_len} samples, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def as_matrix(X, name: str = "X", n_cols: int | None = None) -> np.ndarray:
    """Coerce ``X`` to a 2-D float64 array of finite row vectors."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if arr.shape[0] < 1:
        raise ValueError(f"{name} must contain at least one row")
    if n_cols is not None and arr.shape[1] != n_cols:
        raise ValueError(f"{name} rows must have length {n_cols}, got {arr.shape[1]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_range(value, lo, hi, name: str, *, lo_open: bool = False, hi_open: bool = False) -> float:
    """Require a finite scalar inside the given interval and return it as float."""
    v = float(value)
    if not np.isfinite(v):
        raise ValueError(f"{name} must be finite, got {value!r}")
    below = v <= lo if lo_open else v < lo
    above = v >= hi if hi_open else v > hi
    if below or above:
        left = "(" if lo_open else "["
        right = ")" if hi_open else "]"
        raise ValueError(f"{name} must be in {left}{lo}, {hi}{right}, got {value!r}")
    return v


def frozen_array(x, dtype=np.float64) -> np.ndarray:
    """Return a read-only array owning its data.

    Copies unless ``x`` is already a read-only array of the right dtype, so a
    frozen value can never alias a caller's mutable buffer.
    """
    arr = np.asarray(x, dtype=dtype)
    if arr.flags.writeable:
        arr = arr.copy()
        arr.setflags(write=False)
    return arr
