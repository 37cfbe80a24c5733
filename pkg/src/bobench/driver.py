"""The full Bayesian-optimization loop.

Seed with fixed initial samples, then repeat for a fixed budget: fit the
surrogate on everything observed, maximize the acquisition (timed),
observe the objective noisily at the proposal, record the trial.  The
master seed is split into two independent PCG64 streams via
``numpy.random.SeedSequence`` spawn keys (key 0 feeds observation
noise, key 1 feeds restart start-points), so changing the number of
restarts never perturbs the noise sequence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .acquisition import AcquisitionConfig, acquisition_value, incumbent_from
from .exceptions import BoRunError, GpFitError, NumericError, ProposalError
from .gp import Dataset, KernelParams, MaternGP
from .objectives import NoisyObjective
from .optimizers import Bounds, Method, OptimizerSettings, propose_next_sample
from .validation import as_points_matrix

SNAPSHOT_GRID_SIZE = 500

_NOISE_STREAM_KEY = 0
_STARTS_STREAM_KEY = 1


def _default_bounds() -> Bounds:
    return Bounds(np.array([-2.0]), np.array([2.0]))


def _default_initial_points() -> np.ndarray:
    return np.array([[-0.9], [0.9]])


def split_streams(seed: int):
    """Observation-noise and restart-start generators derived from one seed."""
    noise = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(_NOISE_STREAM_KEY,)))
    starts = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(_STARTS_STREAM_KEY,)))
    return noise, starts


@dataclass(frozen=True)
class BoConfig:
    """Everything one run needs; defaults reproduce the benchmark protocol."""

    acquisition: AcquisitionConfig
    method: Method
    bounds: Bounds = field(default_factory=_default_bounds)
    iterations: int = 10
    initial_points: np.ndarray = field(default_factory=_default_initial_points)
    noise_std: float = 0.2
    kernel: KernelParams = field(default_factory=KernelParams)
    optimizer: OptimizerSettings = field(default_factory=OptimizerSettings)
    n_restarts: int = 25
    seed: int = 42

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        pts = as_points_matrix(self.initial_points, "initial_points")
        if pts.shape[0] == 0:
            raise ValueError("initial_points must be non-empty")
        if pts.shape[1] != self.bounds.dim:
            raise ValueError("initial_points dimension does not match bounds")
        for p in pts:
            if not self.bounds.contains(p):
                raise ValueError(f"initial point {p!r} lies outside the bounds")
        if not self.noise_std >= 0.0:
            raise ValueError("noise_std must be >= 0")
        if self.n_restarts < 1:
            raise ValueError("n_restarts must be >= 1")
        object.__setattr__(self, "initial_points", pts)


@dataclass
class TrialRecord:
    iteration: int
    x_proposed: np.ndarray
    y_observed: float
    best_so_far: float
    proposal_seconds: float
    distance_from_previous: Optional[float]  # None on the first trial


@dataclass
class RunReport:
    config: BoConfig
    initial_points: np.ndarray
    initial_values: np.ndarray
    trials: List[TrialRecord]
    final_best_x: np.ndarray
    final_best_y: float
    mean_proposal_seconds: float
    snapshot_grid: Optional[np.ndarray]  # (SNAPSHOT_GRID_SIZE,) for 1-D runs, else None
    snapshot_means: List[np.ndarray]
    snapshot_sigmas: List[np.ndarray]


@dataclass
class FirstIterationSnapshot:
    """Surrogate and acquisition on a grid after only the initial samples."""

    grid: np.ndarray
    gp_mean: np.ndarray
    gp_sigma: np.ndarray
    acquisition_values: np.ndarray
    x_proposed: np.ndarray
    initial_points: np.ndarray
    initial_values: np.ndarray


def _fit_surrogate(config: BoConfig, data: Dataset) -> MaternGP:
    return MaternGP(
        theta0=config.kernel.theta0,
        lengthscale=config.kernel.lengthscales,
        noise_variance=data.noise_variance,
    ).fit(data.points, data.values)


def _observe_initial(config: BoConfig, objective: NoisyObjective) -> Dataset:
    values = np.array([objective.sample(x) for x in config.initial_points])
    return Dataset(config.initial_points, values, noise_variance=config.noise_std**2)


def _make_objective(config: BoConfig, objective: Optional[NoisyObjective],
                    noise_rng: np.random.Generator) -> NoisyObjective:
    if objective is not None:
        return objective
    return NoisyObjective(noise_std=config.noise_std, rng=noise_rng)


def run_bo(config: BoConfig, objective: Optional[NoisyObjective] = None) -> RunReport:
    """Run the propose/observe/refit loop for ``config.iterations`` rounds.

    When ``objective`` is omitted the benchmark objective is built from
    the config's seed (noise stream) so runs with equal configs are
    bit-for-bit identical apart from wall-clock fields.  A surrogate-fit
    or proposal failure raises ``BoRunError`` carrying the partial
    report.
    """
    noise_rng, starts_rng = split_streams(config.seed)
    objective = _make_objective(config, objective, noise_rng)
    data = _observe_initial(config, objective)

    grid = None
    if config.bounds.dim == 1:
        grid = np.linspace(
            config.bounds.lower[0], config.bounds.upper[0], SNAPSHOT_GRID_SIZE
        )

    trials: List[TrialRecord] = []
    snapshot_means: List[np.ndarray] = []
    snapshot_sigmas: List[np.ndarray] = []

    def partial() -> RunReport:
        return _build_report(config, data, trials, grid, snapshot_means, snapshot_sigmas)

    best = float(np.max(data.values))
    previous: Optional[np.ndarray] = None
    for iteration in range(1, config.iterations + 1):
        try:
            gp = _fit_surrogate(config, data)
            if grid is not None:
                mu, sigma = gp.predict(grid[:, None], return_std=True)
                snapshot_means.append(mu)
                snapshot_sigmas.append(sigma)
            incumbent = incumbent_from(data)
            x_next, report = propose_next_sample(
                gp,
                config.acquisition,
                incumbent,
                config.bounds,
                config.method,
                n_restarts=config.n_restarts,
                rng=starts_rng,
                settings=config.optimizer,
            )
        except (GpFitError, ProposalError, NumericError) as err:
            raise BoRunError(
                f"iteration {iteration} failed: {err}", partial_report=partial()
            ) from err
        y_next = objective.sample(x_next)
        if not np.isfinite(y_next):
            raise BoRunError(
                f"iteration {iteration}: objective returned non-finite value "
                f"{y_next!r} at x={x_next!r}",
                partial_report=partial(),
            )
        best = max(best, y_next)
        distance = None if previous is None else float(np.linalg.norm(x_next - previous))
        trials.append(
            TrialRecord(
                iteration=iteration,
                x_proposed=x_next,
                y_observed=y_next,
                best_so_far=best,
                proposal_seconds=report.elapsed,
                distance_from_previous=distance,
            )
        )
        data = data.append(x_next, y_next)
        previous = x_next
    return _build_report(config, data, trials, grid, snapshot_means, snapshot_sigmas)


def _build_report(config, data, trials, grid, snapshot_means, snapshot_sigmas) -> RunReport:
    k = config.initial_points.shape[0]
    i_best = int(np.argmax(data.values))
    mean_seconds = (
        float(np.mean([t.proposal_seconds for t in trials])) if trials else 0.0
    )
    return RunReport(
        config=config,
        initial_points=data.points[:k].copy(),
        initial_values=data.values[:k].copy(),
        trials=list(trials),
        final_best_x=data.points[i_best].copy(),
        final_best_y=float(data.values[i_best]),
        mean_proposal_seconds=mean_seconds,
        snapshot_grid=grid,
        snapshot_means=list(snapshot_means),
        snapshot_sigmas=list(snapshot_sigmas),
    )


def first_iteration_snapshot(config: BoConfig,
                             objective: Optional[NoisyObjective] = None) -> FirstIterationSnapshot:
    """Fit on the initial samples only and capture grid series plus the proposal.

    This is the data behind "surrogate with initial sampling" /
    "acquisition with proposed location" style plots.  Only 1-D bounds
    are supported (the grid is one-dimensional).
    """
    if config.bounds.dim != 1:
        raise ValueError("first_iteration_snapshot requires 1-D bounds")
    noise_rng, starts_rng = split_streams(config.seed)
    objective = _make_objective(config, objective, noise_rng)
    data = _observe_initial(config, objective)
    gp = _fit_surrogate(config, data)
    incumbent = incumbent_from(data)

    grid = np.linspace(config.bounds.lower[0], config.bounds.upper[0], SNAPSHOT_GRID_SIZE)
    mu, sigma = gp.predict(grid[:, None], return_std=True)
    acq = acquisition_value(config.acquisition, gp, grid[:, None], incumbent)
    x_next, _ = propose_next_sample(
        gp,
        config.acquisition,
        incumbent,
        config.bounds,
        config.method,
        n_restarts=config.n_restarts,
        rng=starts_rng,
        settings=config.optimizer,
    )
    return FirstIterationSnapshot(
        grid=grid,
        gp_mean=mu,
        gp_sigma=sigma,
        acquisition_values=np.asarray(acq, dtype=float),
        x_proposed=x_next,
        initial_points=data.points.copy(),
        initial_values=data.values.copy(),
    )
