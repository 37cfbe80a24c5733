"""The propose/observe/refit loop and its records."""

import numpy as np
import pytest

import bobench.driver
from bobench import (
    AcquisitionConfig,
    BoConfig,
    BoRunError,
    Method,
    NoisyObjective,
    first_iteration_snapshot,
    multimodal,
    run_bo,
    split_streams,
)


def _config(**overrides):
    base = dict(
        acquisition=AcquisitionConfig(kind="ei"),
        method=Method.LBFGS,
        iterations=3,
        n_restarts=8,
        seed=42,
    )
    base.update(overrides)
    return BoConfig(**base)


class TestBoConfig:
    def test_initial_points_must_be_non_empty(self):
        with pytest.raises(ValueError, match="non-empty"):
            _config(initial_points=np.empty((0, 1)))

    def test_initial_points_must_lie_in_bounds(self):
        with pytest.raises(ValueError, match="outside"):
            _config(initial_points=np.array([[5.0]]))

    def test_iterations_must_be_positive(self):
        with pytest.raises(ValueError):
            _config(iterations=0)

    def test_defaults_match_protocol(self):
        config = BoConfig(acquisition=AcquisitionConfig(kind="mpi"), method="tnc")
        np.testing.assert_array_equal(config.initial_points, [[-0.9], [0.9]])
        assert config.iterations == 10
        assert config.seed == 42
        assert config.noise_std == 0.2
        np.testing.assert_array_equal(config.bounds.lower, [-2.0])
        np.testing.assert_array_equal(config.bounds.upper, [2.0])


class TestRunBo:
    def test_single_iteration_noise_free(self):
        config = _config(iterations=1, noise_std=0.0)
        report = run_bo(config)
        assert len(report.trials) == 1
        trial = report.trials[0]
        assert trial.y_observed == multimodal(trial.x_proposed[0])
        expected_best = max(float(np.max(report.initial_values)), trial.y_observed)
        assert trial.best_so_far == expected_best
        assert trial.distance_from_previous is None

    def test_trial_count_and_monotone_best(self):
        report = run_bo(_config(iterations=5))
        assert len(report.trials) == 5
        best = [t.best_so_far for t in report.trials]
        assert all(b2 >= b1 for b1, b2 in zip(best, best[1:]))
        assert report.final_best_y == best[-1] or report.final_best_y == pytest.approx(
            max(best[-1], float(np.max(report.initial_values)))
        )

    def test_proposals_stay_in_bounds(self):
        report = run_bo(_config(iterations=4))
        for t in report.trials:
            assert report.config.bounds.contains(t.x_proposed)

    def test_distances_recorded_between_consecutive_proposals(self):
        report = run_bo(_config(iterations=3))
        t1, t2, t3 = report.trials
        assert t1.distance_from_previous is None
        assert t2.distance_from_previous == pytest.approx(
            float(np.linalg.norm(t2.x_proposed - t1.x_proposed))
        )
        assert t3.distance_from_previous == pytest.approx(
            float(np.linalg.norm(t3.x_proposed - t2.x_proposed))
        )

    def test_mean_proposal_seconds(self):
        report = run_bo(_config(iterations=3))
        times = [t.proposal_seconds for t in report.trials]
        assert all(s > 0 for s in times)
        assert report.mean_proposal_seconds == pytest.approx(
            float(np.mean(times)), abs=1e-12
        )

    def test_deterministic_given_seed(self):
        a = run_bo(_config(iterations=3))
        b = run_bo(_config(iterations=3))
        for ta, tb in zip(a.trials, b.trials):
            np.testing.assert_array_equal(ta.x_proposed, tb.x_proposed)
            assert ta.y_observed == tb.y_observed
            assert ta.best_so_far == tb.best_so_far
            assert ta.distance_from_previous == tb.distance_from_previous
        np.testing.assert_array_equal(a.initial_values, b.initial_values)

    def test_noise_stream_unaffected_by_restart_count(self):
        """Observation noise comes from its own stream: the standardized
        residual sequence is identical for 2 and 8 restarts."""
        residuals = {}
        for restarts in (2, 8):
            report = run_bo(_config(iterations=3, n_restarts=restarts))
            res = [
                (t.y_observed - multimodal(t.x_proposed[0])) / report.config.noise_std
                for t in report.trials
            ]
            residuals[restarts] = res
        np.testing.assert_allclose(residuals[2], residuals[8], atol=1e-12)

    def test_gp_refit_on_growing_dataset(self, monkeypatch):
        """After k trials the surrogate is fit on len(initial) + k points."""
        sizes = []
        original = bobench.driver.MaternGP.fit

        def spy(self, X, y):
            sizes.append(len(y))
            return original(self, X, y)

        monkeypatch.setattr(bobench.driver.MaternGP, "fit", spy)
        run_bo(_config(iterations=4))
        assert sizes == [2, 3, 4, 5]

    def test_snapshot_grids_recorded(self):
        report = run_bo(_config(iterations=2))
        assert report.snapshot_grid.shape == (bobench.driver.SNAPSHOT_GRID_SIZE,)
        assert len(report.snapshot_means) == 2
        assert len(report.snapshot_sigmas) == 2
        assert all(np.all(s >= 0) for s in report.snapshot_sigmas)

    def test_failure_carries_partial_report(self):
        bad = NoisyObjective(noise_std=0.0, rng=np.random.default_rng(0),
                             fn=lambda x: np.where(np.asarray(x) > 1.0, np.nan, 0.0))
        # the NaN lands in the dataset once a proposal exceeds 1, so the
        # next fit rejects it
        config = _config(iterations=6, noise_std=0.0)
        with pytest.raises(BoRunError) as exc:
            run_bo(config, objective=bad)
        partial = exc.value.partial_report
        assert partial is not None
        assert len(partial.trials) < config.iterations

    def test_injected_objective_is_used(self):
        obj = NoisyObjective(noise_std=0.0, rng=np.random.default_rng(0),
                             fn=lambda x: -np.asarray(x) ** 2)
        report = run_bo(_config(iterations=1, noise_std=0.0), objective=obj)
        x = report.trials[0].x_proposed[0]
        assert report.trials[0].y_observed == pytest.approx(-(x**2))


class TestStreamSplit:
    def test_streams_are_disjoint(self):
        noise, starts = split_streams(42)
        assert not np.allclose(noise.standard_normal(5), starts.standard_normal(5))

    def test_streams_reproducible(self):
        a = split_streams(7)[0].standard_normal(5)
        b = split_streams(7)[0].standard_normal(5)
        np.testing.assert_array_equal(a, b)


class TestFirstIterationSnapshot:
    def test_grid_series_shapes(self):
        snap = first_iteration_snapshot(_config(noise_std=0.0))
        n = bobench.driver.SNAPSHOT_GRID_SIZE
        assert snap.grid.shape == (n,)
        assert snap.gp_mean.shape == (n,)
        assert snap.gp_sigma.shape == (n,)
        assert snap.acquisition_values.shape == (n,)
        assert snap.x_proposed.shape == (1,)

    def test_ei_series_non_negative(self):
        snap = first_iteration_snapshot(_config(noise_std=0.0))
        assert np.all(snap.acquisition_values >= 0)

    def test_mpi_series_within_unit_interval(self):
        config = _config(acquisition=AcquisitionConfig(kind="mpi"), noise_std=0.0)
        snap = first_iteration_snapshot(config)
        assert np.all(snap.acquisition_values >= 0)
        assert np.all(snap.acquisition_values <= 1)

    def test_fits_initial_samples_only(self):
        snap = first_iteration_snapshot(_config(noise_std=0.0))
        np.testing.assert_array_equal(snap.initial_points, [[-0.9], [0.9]])
        np.testing.assert_allclose(
            snap.initial_values, multimodal(np.array([-0.9, 0.9]))
        )
