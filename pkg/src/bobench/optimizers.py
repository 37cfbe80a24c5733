"""Bounded maximization of acquisition surfaces.

Two interchangeable methods, both operating on the negated objective
internally and both handling box bounds by projection:

* ``lbfgs_maximize``: limited-memory quasi-Newton via the two-loop
  recursion over the last ``memory`` (s, y) pairs.
* ``tnc_maximize``: truncated Newton, where each search direction comes
  from a conjugate-gradient loop on the Newton system, capped at
  ``cg_max_iterations``, with Hessian-vector products formed by forward
  differences of the gradient (no Hessian is ever built).

Iterates are clamped to the box after every line-search step and
convergence is declared on the projected gradient, whose components are
zeroed wherever a bound is active and the step would leave the box.
Line search is backtracking from step 1.0 with strong-Wolfe checks.

``propose_next_sample`` wraps either method in a sequential multi-start
driver whose wall-clock time covers the whole procedure; restarts run
sequentially so per-proposal timings stay comparable.
"""

from __future__ import annotations

import math
import time
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .acquisition import AcquisitionConfig, Incumbent, acquisition_gradient, acquisition_value
from .exceptions import NumericError, ProposalError
from .validation import as_point

# relative curvature threshold below which an (s, y) pair is discarded
_CURVATURE_SKIP = 1e-10


class Method(str, Enum):
    LBFGS = "lbfgs"
    TNC = "tnc"


@dataclass(frozen=True)
class Bounds:
    """Box constraints; lower < upper component-wise."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = as_point(self.lower, "lower")
        hi = as_point(self.upper, "upper")
        if lo.shape != hi.shape or not np.all(lo < hi):
            raise ValueError("bounds require lower < upper component-wise")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.size

    def clip(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self.lower, self.upper)

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))


@dataclass(frozen=True)
class OptimizerSettings:
    memory: int = 10
    max_iterations: int = 200
    gradient_tolerance: float = 1e-8
    cg_max_iterations: Optional[int] = None  # None -> 2 * dimension
    cg_residual_tolerance: float = 1e-8
    line_search_c1: float = 1e-4
    line_search_c2: float = 0.9
    line_search_max_trials: int = 40
    initial_step: float = 1.0

    def __post_init__(self):
        if self.memory < 1:
            raise ValueError("memory must be >= 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.cg_max_iterations is not None and self.cg_max_iterations < 1:
            raise ValueError("cg_max_iterations must be >= 1 (or None for 2 * dim)")
        if not self.gradient_tolerance > 0.0 or not self.cg_residual_tolerance > 0.0:
            raise ValueError("tolerances must be positive")
        if not 0.0 < self.line_search_c1 < self.line_search_c2 < 1.0:
            raise ValueError("line search constants require 0 < c1 < c2 < 1")


@dataclass
class OptimizerReport:
    """Outcome of one (possibly multi-start) bounded maximization."""

    x_best: np.ndarray
    value_best: float
    n_function_evals: int
    n_gradient_evals: int
    elapsed: float
    restarts_run: int
    converged: bool


class _Tracker:
    """Counts evaluations, rejects non-finite values, and remembers the best point."""

    def __init__(self, objective: Callable, gradient: Callable):
        self._objective = objective
        self._gradient = gradient
        self.n_function_evals = 0
        self.n_gradient_evals = 0
        self.x_best: Optional[np.ndarray] = None
        self.value_best = -math.inf

    def value(self, x: np.ndarray) -> float:
        f = float(self._objective(x))
        self.n_function_evals += 1
        if not math.isfinite(f):
            raise NumericError("objective returned a non-finite value", point=x.copy())
        if f > self.value_best:
            self.value_best = f
            self.x_best = x.copy()
        return f

    def gradient(self, x: np.ndarray) -> np.ndarray:
        g = np.asarray(self._gradient(x), dtype=float)
        self.n_gradient_evals += 1
        if not np.all(np.isfinite(g)):
            raise NumericError("gradient returned a non-finite value", point=x.copy())
        return g


def _projected(g: np.ndarray, x: np.ndarray, bounds: Bounds) -> np.ndarray:
    """Gradient of the minimized function with blocked components zeroed."""
    pg = g.copy()
    pg[(x <= bounds.lower) & (g > 0.0)] = 0.0
    pg[(x >= bounds.upper) & (g < 0.0)] = 0.0
    return pg


def _line_search(phi, grad_phi, x, f0, g0, d, bounds: Bounds, settings: OptimizerSettings):
    """Backtrack along ``d`` from step 1.0, clamping each trial to the box.

    Accepts the first trial with a strict decrease that satisfies the
    Armijo condition along the actual (clamped) displacement, then
    evaluates the gradient there and reports whether the strong-Wolfe
    curvature condition also holds (callers use that to gate curvature-
    pair updates).  Returns (x, f, g, curvature_ok), or None when no
    decreasing point was found within the trial budget, meaning the
    caller cannot make progress at double precision.
    """
    c1, c2 = settings.line_search_c1, settings.line_search_c2
    alpha = settings.initial_step
    slope = float(g0 @ d)
    for _ in range(settings.line_search_max_trials):
        x_t = bounds.clip(x + alpha * d)
        step = x_t - x
        if not np.any(step):
            alpha *= 0.5
            continue
        f_t = phi(x_t)
        # min(..., 0) keeps clamped steps from accepting uphill moves
        if f_t < f0 and f_t <= f0 + c1 * min(0.0, float(g0 @ step)):
            g_t = grad_phi(x_t)
            curvature_ok = abs(float(g_t @ d)) <= c2 * abs(slope)
            return x_t, f_t, g_t, curvature_ok
        alpha *= 0.5
    return None


def _two_loop(g: np.ndarray, history: deque) -> np.ndarray:
    """Apply the implicit inverse-Hessian approximation to ``g``."""
    if not history:
        return g.copy()
    q = g.copy()
    alphas = []
    for s, y, rho in reversed(history):
        a = rho * float(s @ q)
        alphas.append(a)
        q -= a * y
    s_last, y_last, _ = history[-1]
    q *= float(s_last @ y_last) / float(y_last @ y_last)
    for (s, y, rho), a in zip(history, reversed(alphas)):
        b = rho * float(y @ q)
        q += (a - b) * s
    return q


def _minimize_lbfgs(phi, grad_phi, x0, bounds, settings) -> bool:
    x = bounds.clip(x0)
    f = phi(x)
    g = grad_phi(x)
    history: deque = deque(maxlen=settings.memory)
    for _ in range(settings.max_iterations):
        pg = _projected(g, x, bounds)
        if np.linalg.norm(pg) <= settings.gradient_tolerance:
            return True
        d = -_two_loop(g, history)
        if float(d @ g) >= 0.0:
            d = -pg  # quasi-Newton direction lost descent; restart from steepest
        result = _line_search(phi, grad_phi, x, f, g, d, bounds, settings)
        if result is None:
            return False
        x_new, f_new, g_new, curvature_ok = result
        s = x_new - x
        y = g_new - g
        sy = float(s @ y)
        if curvature_ok and sy > _CURVATURE_SKIP * np.linalg.norm(s) * np.linalg.norm(y):
            history.append((s, y, 1.0 / sy))
        x, f, g = x_new, f_new, g_new
    return bool(np.linalg.norm(_projected(g, x, bounds)) <= settings.gradient_tolerance)


def _hessian_vec(grad_phi, x, g_at_x, p):
    """Forward-difference Hessian-vector product with step 1e-7 (1 + |x|)."""
    p_norm = float(np.linalg.norm(p))
    if p_norm == 0.0:
        return np.zeros_like(p)
    eps = 1e-7 * (1.0 + float(np.linalg.norm(x))) / p_norm
    return (grad_phi(x + eps * p) - g_at_x) / eps


def _truncated_cg(grad_phi, x, g, cap: int, tol: float) -> np.ndarray:
    """Approximately solve the Newton system ``H d = -g`` by capped CG.

    Negative curvature exits immediately with the direction built so
    far (steepest descent if it strikes on the first iteration).
    """
    d = np.zeros_like(g)
    r = g.copy()
    p = -r
    rs = float(r @ r)
    for i in range(cap):
        if math.sqrt(rs) <= tol:
            break
        hp = _hessian_vec(grad_phi, x, g, p)
        curvature = float(p @ hp)
        if curvature <= 0.0:
            if i == 0:
                d = -g.copy()
            break
        a = rs / curvature
        d += a * p
        r += a * hp
        rs_new = float(r @ r)
        p = -r + (rs_new / rs) * p
        rs = rs_new
    if not np.any(d):
        d = -g.copy()
    return d


def _minimize_tnc(phi, grad_phi, x0, bounds, settings) -> bool:
    x = bounds.clip(x0)
    f = phi(x)
    g = grad_phi(x)
    cap = settings.cg_max_iterations or 2 * x.size
    for _ in range(settings.max_iterations):
        pg = _projected(g, x, bounds)
        if np.linalg.norm(pg) <= settings.gradient_tolerance:
            return True
        d = _truncated_cg(grad_phi, x, g, cap, settings.cg_residual_tolerance)
        if float(d @ g) >= 0.0:
            d = -pg
        result = _line_search(phi, grad_phi, x, f, g, d, bounds, settings)
        if result is None:
            return False
        x, f, g = result[0], result[1], result[2]
    return bool(np.linalg.norm(_projected(g, x, bounds)) <= settings.gradient_tolerance)


def _maximize(core, objective, gradient, start, bounds, settings) -> OptimizerReport:
    settings = settings or OptimizerSettings()
    start = as_point(start, "start")
    if start.size != bounds.dim:
        raise ValueError(f"start has dimension {start.size}, bounds have {bounds.dim}")
    if not bounds.contains(start):
        raise ValueError(f"start {start!r} lies outside the bounds")
    tracker = _Tracker(objective, gradient)
    begin = time.perf_counter()
    converged = core(
        lambda x: -tracker.value(x),
        lambda x: -tracker.gradient(x),
        start,
        bounds,
        settings,
    )
    elapsed = time.perf_counter() - begin
    return OptimizerReport(
        x_best=tracker.x_best,
        value_best=tracker.value_best,
        n_function_evals=tracker.n_function_evals,
        n_gradient_evals=tracker.n_gradient_evals,
        elapsed=elapsed,
        restarts_run=1,
        converged=converged,
    )


def lbfgs_maximize(objective, gradient, start, bounds: Bounds,
                   settings: Optional[OptimizerSettings] = None) -> OptimizerReport:
    """Maximize ``objective`` over the box with projected L-BFGS."""
    return _maximize(_minimize_lbfgs, objective, gradient, start, bounds, settings)


def tnc_maximize(objective, gradient, start, bounds: Bounds,
                 settings: Optional[OptimizerSettings] = None) -> OptimizerReport:
    """Maximize ``objective`` over the box with truncated Newton."""
    return _maximize(_minimize_tnc, objective, gradient, start, bounds, settings)


def propose_next_sample(gp, config: AcquisitionConfig, incumbent: Incumbent,
                        bounds: Bounds, method: Method, n_restarts: int = 25,
                        rng: Optional[np.random.Generator] = None,
                        settings: Optional[OptimizerSettings] = None):
    """Maximize the acquisition from ``n_restarts`` uniform starts.

    Returns ``(x_next, report)`` where the report's ``elapsed`` covers
    the entire multi-start procedure, its evaluation counters are summed
    over restarts, ``restarts_run`` counts the restarts that completed,
    and ``converged`` reflects the winning restart.  Restarts that fail
    numerically are skipped; if every restart fails a ``ProposalError``
    is raised.  Given the same posterior, config, and generator state
    the result is bit-for-bit reproducible.  Ties between restarts go to
    the earliest one.
    """
    if n_restarts < 1:
        raise ValueError("n_restarts must be >= 1")
    method = Method(method)
    rng = rng if rng is not None else np.random.default_rng()
    run = lbfgs_maximize if method is Method.LBFGS else tnc_maximize

    def objective(x):
        return acquisition_value(config, gp, x, incumbent)

    def gradient(x):
        return acquisition_gradient(config, gp, x, incumbent)

    starts = rng.uniform(bounds.lower, bounds.upper, size=(n_restarts, bounds.dim))
    begin = time.perf_counter()
    best: Optional[OptimizerReport] = None
    completed = 0
    total_f = total_g = 0
    last_error: Optional[NumericError] = None
    for start in starts:
        try:
            report = run(objective, gradient, start, bounds, settings)
        except NumericError as err:
            last_error = err
            continue
        completed += 1
        total_f += report.n_function_evals
        total_g += report.n_gradient_evals
        if best is None or report.value_best > best.value_best:
            best = report
    elapsed = time.perf_counter() - begin
    if best is None:
        raise ProposalError(f"all {n_restarts} restarts failed numerically") from last_error

    combined = OptimizerReport(
        x_best=best.x_best.copy(),
        value_best=best.value_best,
        n_function_evals=total_f,
        n_gradient_evals=total_g,
        elapsed=elapsed,
        restarts_run=completed,
        converged=best.converged,
    )
    return combined.x_best.copy(), combined
