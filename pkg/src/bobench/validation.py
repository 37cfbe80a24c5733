"""Input-validation helpers used throughout the package."""

from __future__ import annotations

import numpy as np


def as_finite_array(x, name: str = "x") -> np.ndarray:
    """Coerce to a float64 array; reject NaN/inf."""
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite, got {arr!r}")
    return arr


def as_point(x, name: str = "x") -> np.ndarray:
    """Coerce a scalar or 1-D array-like to a finite point of shape (d,)."""
    arr = as_finite_array(x, name)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a scalar or 1-D point, got shape {arr.shape}")
    return arr


def as_points_matrix(X, name: str = "X") -> np.ndarray:
    """Coerce to a finite 2-D array of shape (n, d); n may be zero."""
    arr = as_finite_array(X, name)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D of shape (n, d), got shape {arr.shape}")
    return arr


def as_square_matrix(A, name: str = "A") -> np.ndarray:
    """Coerce to a finite square 2-D array."""
    arr = as_points_matrix(A, name)
    if arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got shape {arr.shape}")
    return arr
