from pathlib import Path

import numpy as np
import pytest

from bobench import Dataset, MaternGP, multimodal

REPO_ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture
def repo_root() -> Path:
    return REPO_ROOT


def separated_points(rng, n, lo=-2.0, hi=2.0, min_sep=0.1):
    """Uniform draws rejected until pairwise-separated.

    Interpolating through near-coincident points with independent values
    is ill-posed under a fixed 1e-10 jitter, so interpolation-accuracy
    tests keep training points at least ``min_sep`` apart.
    """
    while True:
        X = rng.uniform(lo, hi, size=(n, 1))
        if n == 1 or np.min(np.abs(X - X.T)[np.triu_indices(n, 1)]) >= min_sep:
            return X


@pytest.fixture
def make_posterior():
    """Factory for seeded random 1-D posteriors over [-2, 2]."""

    def _make(seed, n_min=3, n_max=8, noise_variance=0.01, lo=-2.0, hi=2.0):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(n_min, n_max + 1))
        X = rng.uniform(lo, hi, size=(n, 1))
        y = multimodal(X[:, 0]) + 0.1 * rng.standard_normal(n)
        gp = MaternGP(noise_variance=noise_variance).fit(X, y)
        data = Dataset(X, y, noise_variance)
        return gp, data

    return _make
