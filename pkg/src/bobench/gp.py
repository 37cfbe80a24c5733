"""Matérn 5/2 kernel and a zero-mean Gaussian-process regressor.

The regressor follows the scikit-learn estimator protocol (``fit`` /
``predict`` / ``get_params``) so it slots into the wider ecosystem, but
its internals are deliberately small: a hand-rolled Cholesky of the
Gram matrix with jitter escalation, cached triangular factor and weight
vector, and latent-function (noise-free) predictive variance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError

from . import stats
from .exceptions import FactorizationError, GpFitError
from .validation import as_finite_array, as_point, as_points_matrix

# diagonal jitter starts at BASE * theta0 and is multiplied by 10 on each
# factorization failure, up to CAP * theta0
_JITTER_BASE = 1e-10
_JITTER_CAP = 1e-4


@dataclass(frozen=True)
class KernelParams:
    """Matérn 5/2 hyperparameters: signal variance and per-dimension lengthscales."""

    theta0: float = 1.0
    lengthscales: np.ndarray = None

    def __post_init__(self):
        if not self.theta0 > 0.0:
            raise ValueError(f"theta0 must be positive, got {self.theta0}")
        ls = np.ones(1) if self.lengthscales is None else self.lengthscales
        ls = np.atleast_1d(as_finite_array(ls, "lengthscales"))
        if ls.ndim != 1 or not np.all(ls > 0.0):
            raise ValueError("lengthscales must be a 1-D array of positive values")
        object.__setattr__(self, "lengthscales", ls)


@dataclass(frozen=True)
class Dataset:
    """Observed pairs (points, values) plus the observation-noise variance."""

    points: np.ndarray  # (t, d)
    values: np.ndarray  # (t,)
    noise_variance: float = 0.0

    def __post_init__(self):
        pts = as_points_matrix(self.points, "points")
        vals = as_finite_array(self.values, "values")
        if vals.ndim != 1 or vals.shape[0] != pts.shape[0]:
            raise ValueError(
                f"values must be 1-D with one entry per point; got "
                f"{pts.shape[0]} points and values of shape {vals.shape}"
            )
        if not self.noise_variance >= 0.0:
            raise ValueError(f"noise_variance must be >= 0, got {self.noise_variance}")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def append(self, x, y: float) -> "Dataset":
        """Return a new Dataset extended by one observation."""
        x = as_point(x, "x")
        return Dataset(
            np.vstack([self.points, x[None, :]]),
            np.append(self.values, float(y)),
            self.noise_variance,
        )


def scaled_sq_dist(x, x_prime, lengthscales) -> float:
    """Squared distance with per-dimension lengthscale division.

    ``sum_d ((x_d - x'_d) / l_d)^2``; symmetric and zero iff x == x'.
    """
    x = as_point(x, "x")
    x_prime = as_point(x_prime, "x_prime")
    ls = as_point(lengthscales, "lengthscales")
    if x.shape != x_prime.shape or x.shape != ls.shape:
        raise ValueError(
            f"dimension mismatch: x {x.shape}, x_prime {x_prime.shape}, "
            f"lengthscales {ls.shape}"
        )
    diff = (x - x_prime) / ls
    return float(diff @ diff)


def _matern52_from_r2(r2, theta0: float):
    s = np.sqrt(5.0 * r2)
    return theta0 * (1.0 + s + (5.0 / 3.0) * r2) * np.exp(-s)


def matern52(x, x_prime, params: KernelParams) -> float:
    """Matérn 5/2 covariance ``theta0 (1 + sqrt(5 r^2) + 5/3 r^2) exp(-sqrt(5 r^2))``."""
    r2 = scaled_sq_dist(x, x_prime, _broadcast_ls(params, as_point(x).size))
    return float(_matern52_from_r2(r2, params.theta0))


def _broadcast_ls(params: KernelParams, dim: int) -> np.ndarray:
    ls = params.lengthscales
    if ls.size == 1:
        return np.full(dim, ls[0])
    if ls.size != dim:
        raise ValueError(f"lengthscales have size {ls.size}, expected {dim}")
    return ls


def kernel_matrix(A, B, params: KernelParams) -> np.ndarray:
    """Matérn 5/2 cross-covariance matrix between two point sets.

    ``A`` is (nA, d) and ``B`` is (nB, d); the result is (nA, nB).  When
    the same array is passed twice the result is exactly symmetric with
    ``theta0`` on the diagonal.
    """
    A = as_points_matrix(A, "A")
    B = as_points_matrix(B, "B")
    if A.shape[1] != B.shape[1]:
        raise ValueError(
            f"dimension mismatch: A has d={A.shape[1]}, B has d={B.shape[1]}"
        )
    ls = _broadcast_ls(params, A.shape[1])
    diff = (A[:, None, :] - B[None, :, :]) / ls
    r2 = np.einsum("ijk,ijk->ij", diff, diff)
    return _matern52_from_r2(r2, params.theta0)


class MaternGP(RegressorMixin, BaseEstimator):
    """Zero-mean Gaussian-process regressor with a fixed Matérn 5/2 kernel.

    Parameters
    ----------
    theta0 : float
        Signal variance (prior variance far from any data).
    lengthscale : float or array-like
        Per-dimension lengthscale; a scalar is shared across dimensions.
    noise_variance : float
        Observation-noise variance added to the Gram diagonal.

    Hyperparameters are fixed at construction; there is no marginal-
    likelihood optimization.  After ``fit`` the estimator is treated as
    immutable, so concurrent ``predict`` calls are safe.
    """

    def __init__(self, theta0: float = 1.0, lengthscale=1.0, noise_variance: float = 0.0):
        self.theta0 = theta0
        self.lengthscale = lengthscale
        self.noise_variance = noise_variance

    def fit(self, X, y) -> "MaternGP":
        """Factor the Gram matrix and cache the posterior weights.

        ``X`` is (t, d) and ``y`` is (t,); both may be empty (t = 0), in
        which case predictions reproduce the prior.  Raises
        ``GpFitError`` if the Gram matrix cannot be factored even after
        jitter escalation.
        """
        X = as_points_matrix(X, "X")
        y = as_finite_array(y, "y")
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise ValueError(
                f"y must be 1-D with one value per row of X; got X {X.shape}, "
                f"y {y.shape}"
            )
        if not self.noise_variance >= 0.0:
            raise ValueError(f"noise_variance must be >= 0, got {self.noise_variance}")
        params = KernelParams(float(self.theta0), np.atleast_1d(
            as_finite_array(self.lengthscale, "lengthscale")))

        K = kernel_matrix(X, X, params)
        jitter = _JITTER_BASE * params.theta0
        cap = _JITTER_CAP * params.theta0
        last_err: FactorizationError | None = None
        L = None
        while True:
            try:
                L = stats.cholesky(K + (self.noise_variance + jitter) * np.eye(len(X)))
                break
            except FactorizationError as err:
                last_err = err
                jitter *= 10.0
                if jitter > cap:
                    raise GpFitError(
                        f"Gram matrix not positive definite even with jitter "
                        f"{cap:.1e} * theta0"
                    ) from last_err

        self.params_ = params
        self.X_train_ = X.copy()
        self.y_train_ = y.copy()
        self.jitter_ = jitter
        self.L_ = L
        self.alpha_ = stats.solve_cholesky(L, y) if len(y) else y.copy()
        return self

    def predict(self, X, return_std: bool = False):
        """Posterior mean (and latent std) at query points ``X`` of shape (n, d).

        The reported standard deviation is that of the latent function,
        i.e. it excludes the observation noise, and is clamped at zero
        before the square root.
        """
        if not hasattr(self, "L_"):
            raise NotFittedError("this MaternGP instance is not fitted yet")
        X = as_points_matrix(X, "X")
        if X.shape[1] != self._dim():
            raise ValueError(
                f"query dimension {X.shape[1]} does not match training "
                f"dimension {self._dim()}"
            )
        if len(self.y_train_) == 0:
            mu = np.zeros(X.shape[0])
            if return_std:
                return mu, np.full(X.shape[0], np.sqrt(self.params_.theta0))
            return mu

        Ks = kernel_matrix(self.X_train_, X, self.params_)  # (t, n)
        mu = Ks.T @ self.alpha_
        if not return_std:
            return mu
        v = stats.solve_lower(self.L_, Ks)
        var = np.maximum(self.params_.theta0 - np.einsum("ij,ij->j", v, v), 0.0)
        return mu, np.sqrt(var)

    def _dim(self) -> int:
        return self.X_train_.shape[1]
