"""Improvement-based acquisition functions over a fitted surrogate.

Both functions reason about the latent objective through the surrogate's
``predict(X, return_std=True)`` interface, so any estimator exposing
that method works.  Predictive standard deviations at or below
``SIGMA_ZERO`` are treated as exactly zero, which activates the
deterministic branch of each acquisition.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import stats
from .exceptions import NumericError
from .gp import Dataset
from .validation import as_finite_array, as_point

SIGMA_ZERO = 1e-8


class AcquisitionKind(str, Enum):
    EI = "ei"
    MPI = "mpi"


@dataclass(frozen=True)
class AcquisitionConfig:
    """Which acquisition to use and its improvement margin ``xi``."""

    kind: AcquisitionKind
    xi: float = 0.01

    def __post_init__(self):
        object.__setattr__(self, "kind", AcquisitionKind(self.kind))
        if not self.xi >= 0.0:
            raise ValueError(f"xi must be >= 0, got {self.xi}")


@dataclass(frozen=True)
class Incumbent:
    """Best location/value observed so far."""

    x_plus: np.ndarray
    f_plus: float


def incumbent_from(data: Dataset) -> Incumbent:
    """Pick the observation with maximal value; ties go to the lowest index."""
    if len(data) == 0:
        raise ValueError("cannot take an incumbent from an empty dataset")
    i = int(np.argmax(data.values))
    return Incumbent(data.points[i].copy(), float(data.values[i]))


def _as_batch(x, dim: int):
    """Canonicalize a point / batch of points to (n, d); remember if it was single."""
    arr = as_finite_array(x, "x")
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
        single = True
    elif arr.ndim == 1:
        arr = arr.reshape(1, -1)
        single = True
    elif arr.ndim == 2:
        single = False
    else:
        raise ValueError(f"x must be a point or a batch of points, got shape {arr.shape}")
    if arr.shape[1] != dim:
        raise ValueError(f"x has dimension {arr.shape[1]}, expected {dim}")
    return arr, single


def _posterior_at(gp, x):
    arr = as_finite_array(x, "x")
    if hasattr(gp, "X_train_"):
        dim = gp.X_train_.shape[1]
    elif arr.ndim == 2:
        dim = arr.shape[1]
    else:
        dim = max(arr.size, 1) if arr.ndim == 1 else 1
    batch, single = _as_batch(arr, dim)
    mu, sigma = gp.predict(batch, return_std=True)
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(sigma))):
        raise NumericError("posterior returned a non-finite mean or sigma")
    return mu, sigma, single


def _finish(values: np.ndarray, single: bool):
    if not np.all(np.isfinite(values)):
        raise NumericError("acquisition value is non-finite")
    return float(values[0]) if single else values


def probability_of_improvement(gp, x, incumbent: Incumbent, xi: float = 0.01):
    """Probability that the latent value at ``x`` exceeds ``f_plus + xi``.

    Returns ``Phi((mu - f_plus - xi) / sigma)`` where the posterior is
    non-degenerate; with sigma = 0 it returns 1 when mu strictly exceeds
    the margin and 0 otherwise (the limit of the cdf as sigma -> 0+).
    """
    mu, sigma, single = _posterior_at(gp, x)
    delta = mu - incumbent.f_plus - xi
    positive = sigma > SIGMA_ZERO
    z = delta / np.where(positive, sigma, 1.0)
    out = np.where(positive, stats.std_normal_cdf(z), (delta > 0.0).astype(float))
    return _finish(out, single)


def expected_improvement(gp, x, incumbent: Incumbent, xi: float = 0.01):
    """Expected improvement of the latent value over ``f_plus + xi``.

    ``delta * Phi(z) + sigma * pdf(z)`` with ``z = delta / sigma`` when
    sigma > 0, exactly 0 when sigma = 0.  The result is clamped at zero:
    the closed form can round to a tiny negative number deep in the
    no-improvement tail.
    """
    mu, sigma, single = _posterior_at(gp, x)
    delta = mu - incumbent.f_plus - xi
    positive = sigma > SIGMA_ZERO
    z = delta / np.where(positive, sigma, 1.0)
    ei = delta * stats.std_normal_cdf(z) + sigma * stats.std_normal_pdf(z)
    out = np.where(positive, np.maximum(ei, 0.0), 0.0)
    return _finish(out, single)


def acquisition_value(config: AcquisitionConfig, gp, x, incumbent: Incumbent):
    """Evaluate the configured acquisition at ``x``."""
    if config.kind is AcquisitionKind.EI:
        return expected_improvement(gp, x, incumbent, config.xi)
    return probability_of_improvement(gp, x, incumbent, config.xi)


def acquisition_gradient(config: AcquisitionConfig, gp, x, incumbent: Incumbent) -> np.ndarray:
    """Central finite-difference gradient of the acquisition at a point.

    Per-dimension step ``1e-6 * max(1, |x_i|)``; the 2d probe points are
    evaluated in a single batched call.
    """
    x = as_point(x, "x")
    d = x.size
    h = 1e-6 * np.maximum(1.0, np.abs(x))
    probes = np.repeat(x[None, :], 2 * d, axis=0)
    idx = np.arange(d)
    probes[2 * idx, idx] += h
    probes[2 * idx + 1, idx] -= h
    vals = acquisition_value(config, gp, probes, incumbent)
    return (vals[0::2] - vals[1::2]) / (2.0 * h)
