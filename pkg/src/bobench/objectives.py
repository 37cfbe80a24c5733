"""Benchmark objective, observation-noise wrapper, and a dense-grid oracle."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .validation import as_finite_array


def multimodal(x):
    """1-D benchmark ``-sin(3 x^2) - x^2 + 1.3 x``.

    A downward parabola with an oscillation whose frequency grows with
    |x|: several local maxima and a single global one near x = 1.23.
    Accepts scalars or arrays.
    """
    x = as_finite_array(x, "x")
    x2 = x * x
    out = -np.sin(3.0 * x2) - x2 + 1.3 * x
    return out[()] if out.ndim == 0 else out


@dataclass
class NoisyObjective:
    """Additive homoscedastic Gaussian noise around a base function.

    Every ``sample`` call draws one standard normal from ``rng`` (even
    when ``noise_std`` is zero), so the draw sequence depends only on
    the call count.  The generator is PCG64 via
    ``numpy.random.default_rng``, which is reproducible across
    platforms from a seed.  The instance owns its generator: concurrent
    use requires separate, distinctly seeded instances.
    """

    noise_std: float = 0.2
    rng: np.random.Generator = field(default_factory=np.random.default_rng)
    fn: Callable = multimodal

    def __post_init__(self):
        if not self.noise_std >= 0.0:
            raise ValueError(f"noise_std must be >= 0, got {self.noise_std}")

    def true_value(self, x) -> float:
        """Noise-free value at a single point."""
        return float(np.asarray(self.fn(x), dtype=float).reshape(()))

    def sample(self, x) -> float:
        """Noisy observation; advances the generator state."""
        z = float(self.rng.standard_normal())
        return self.true_value(x) + self.noise_std * z


def grid_argmax(fn, lower: float, upper: float, n_points: int):
    """Maximize ``fn`` on ``n_points`` uniform grid points over [lower, upper].

    Returns ``(x_star, f_star)``; exact ties go to the lowest x.  Ground
    truth oracle for the 1-D benchmark; n_points >= 2 and lower < upper
    are required.
    """
    if n_points < 2:
        raise ValueError(f"n_points must be >= 2, got {n_points}")
    if not lower < upper:
        raise ValueError(f"invalid range: lower={lower}, upper={upper}")
    xs = np.linspace(float(lower), float(upper), int(n_points))
    try:
        values = np.asarray(fn(xs), dtype=float)
        if values.shape != xs.shape:
            raise TypeError
    except (TypeError, ValueError):
        values = np.array([float(fn(x)) for x in xs])
    i = int(np.argmax(values))
    return float(xs[i]), float(values[i])
