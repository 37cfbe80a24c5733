"""Standard-normal pdf/cdf and small dense SPD linear algebra.

The cdf is evaluated as ``erfc(-z / sqrt(2)) / 2`` through
``scipy.special.ndtr``, i.e. the Cephes rational approximations of
erf/erfc.  The documented peak error of that routine is a few units in
the last place (absolute error well below 1e-13 over the whole real
line), comfortably inside the 1e-10 budget the acquisition optimizer
needs to avoid spurious stationary points.

The Cholesky routines are unblocked inner-product implementations: the
Gram matrices in this package never exceed a few tens of rows, so there
is nothing to gain from blocking, and a hand-rolled loop lets the
factorization report the exact pivot at which positive definiteness
fails.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import ndtr

from .exceptions import FactorizationError
from .validation import as_finite_array, as_square_matrix

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

# max |A_ij - A_ji| allowed, relative to max |A_ij|
_SYMMETRY_RTOL = 1e-12


def std_normal_pdf(z):
    """Standard normal density ``exp(-z^2 / 2) / sqrt(2 pi)``.

    Accepts a scalar or an ndarray; the result matches the input shape.
    Non-finite input raises ``ValueError``.
    """
    z = as_finite_array(z, "z")
    out = np.exp(-0.5 * z * z) * _INV_SQRT_2PI
    return out[()] if out.ndim == 0 else out


def std_normal_cdf(z):
    """Standard normal cumulative distribution function.

    Computed as ``erfc(-z / sqrt(2)) / 2`` (Cephes ``ndtr``; see module
    docstring for the error bound).  Values are in [0, 1] and never
    underflow below zero.  Accepts a scalar or an ndarray.
    """
    z = as_finite_array(z, "z")
    out = ndtr(z)
    return out[()] if out.ndim == 0 else out


def cholesky(A) -> np.ndarray:
    """Factor a symmetric positive-definite matrix as ``L @ L.T``.

    The input may be asymmetric up to rounding (max |A_ij - A_ji| within
    1e-12 of max |A|); it is symmetrized by averaging before
    factorization.  Returns the lower-triangular factor with strictly
    positive diagonal and exact zeros above the diagonal.

    Raises
    ------
    FactorizationError
        If a non-positive pivot is encountered; the error carries the
        failing pivot index.
    ValueError
        If the input is not square or asymmetric beyond tolerance.
    """
    A = as_square_matrix(A, "A")
    scale = np.max(np.abs(A)) if A.size else 0.0
    if A.size and np.max(np.abs(A - A.T)) > _SYMMETRY_RTOL * scale:
        raise ValueError("matrix is asymmetric beyond tolerance")
    A = 0.5 * (A + A.T)

    n = A.shape[0]
    L = np.zeros_like(A)
    for j in range(n):
        pivot = A[j, j] - L[j, :j] @ L[j, :j]
        if not (pivot > 0.0) or not math.isfinite(pivot):
            raise FactorizationError(j, float(pivot))
        L[j, j] = math.sqrt(pivot)
        if j + 1 < n:
            L[j + 1 :, j] = (A[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]) / L[j, j]
    return L


def solve_lower(L: np.ndarray, b):
    """Solve ``L @ x = b`` by forward substitution.

    ``b`` may be a vector of shape (n,) or a matrix of shape (n, k).
    """
    L = as_square_matrix(L, "L")
    x = np.array(b, dtype=float)
    if x.shape[0] != L.shape[0]:
        raise ValueError(
            f"dimension mismatch: L is {L.shape[0]}x{L.shape[0]}, b has leading "
            f"dimension {x.shape[0]}"
        )
    for i in range(L.shape[0]):
        if i:
            x[i] -= L[i, :i] @ x[:i]
        x[i] /= L[i, i]
    return x


def _solve_upper(U: np.ndarray, b: np.ndarray) -> np.ndarray:
    x = np.array(b, dtype=float)
    n = U.shape[0]
    for i in range(n - 1, -1, -1):
        if i + 1 < n:
            x[i] -= U[i, i + 1 :] @ x[i + 1 :]
        x[i] /= U[i, i]
    return x


def solve_cholesky(L: np.ndarray, b):
    """Solve ``(L @ L.T) @ x = b`` given the lower-triangular factor ``L``."""
    return _solve_upper(np.asarray(L, dtype=float).T, solve_lower(L, b))
