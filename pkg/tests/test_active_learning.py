"""Active-learning loop tests on small streams."""

import json

import numpy as np
import pytest

from riskal import (
    DatasetConfig,
    LearnerConfig,
    UtilityModel,
    evpi,
    fit_supervised,
    generate,
    run,
    split,
    to_arrays,
)


@pytest.fixture
def small_split():
    data = generate(DatasetConfig(n_cycles=2, points_per_cycle=200, seed=5))
    return split(data, test_fraction=0.5, labeled_fraction=0.05, seed=3)


def max_param_diff(a, b):
    return max(
        np.abs(a.map_means - b.map_means).max(),
        np.abs(a.map_covariances - b.map_covariances).max(),
        np.abs(a.map_mixing - b.map_mixing).max(),
    )


class TestQueryCriterion:
    def test_infinite_cost_never_queries(self, small_split, prior, tm):
        um = UtilityModel(c_ins=np.inf)
        result = run(small_split, prior, tm, um, LearnerConfig())
        assert result.query_count == 0
        assert len(result.metric_curves["decision_accuracy"]) == 1
        # the model never changes after initialisation
        init = fit_supervised(prior, result.labeled_x[: len(small_split.labeled_seed)],
                              result.labeled_y[: len(small_split.labeled_seed)])
        assert max_param_diff(result.final_state, init) == 0.0

    def test_zero_cost_queries_every_positive_evpi_point(self, small_split, prior, tm):
        um = UtilityModel(c_ins=0.0)
        result = run(small_split, prior, tm, um, LearnerConfig())
        for record in result.step_records:
            assert record.queried == (record.evpi_value > 0.0)
        assert len(result.labeled_y) == len(small_split.labeled_seed) + result.query_count

    def test_strict_inequality_criterion(self, small_split, prior, tm, um):
        result = run(small_split, prior, tm, um, LearnerConfig())
        for record in result.step_records:
            assert record.queried == (record.evpi_value > um.c_ins)

    def test_queried_points_use_perfect_information_action(self, small_split, prior, tm, um):
        result = run(small_split, prior, tm, um, LearnerConfig())
        assert result.query_count > 0
        for record in result.step_records:
            if record.queried:
                assert record.chosen_action == record.optimal_action


class TestReplayAndDeterminism:
    def test_replaying_posteriors_reproduces_query_flags(self, small_split, prior, tm, um):
        result = run(small_split, prior, tm, um, LearnerConfig(em_enabled=True))
        for record in result.step_records:
            recomputed = evpi(record.posterior, tm, um)
            assert recomputed == pytest.approx(record.evpi_value, abs=1e-12)
            assert record.queried == (recomputed > um.c_ins)

    def test_identical_inputs_identical_results(self, small_split, prior, tm, um):
        a = run(small_split, prior, tm, um, LearnerConfig(em_enabled=True), seed=1)
        b = run(small_split, prior, tm, um, LearnerConfig(em_enabled=True), seed=1)
        assert json.dumps(a.to_dict(), sort_keys=True) == json.dumps(b.to_dict(), sort_keys=True)


class TestLabeledSetGrowth:
    def test_queried_points_join_labeled_set_once(self, small_split, prior, tm, um):
        result = run(small_split, prior, tm, um, LearnerConfig())
        positions = result.queried_positions
        assert len(positions) == len(set(positions)) == result.query_count
        assert positions == sorted(positions)
        n_seed = len(small_split.labeled_seed)
        _, sx, sy = to_arrays(small_split.unlabeled_stream)
        np.testing.assert_array_equal(result.labeled_x[n_seed:], sx[positions])
        np.testing.assert_array_equal(result.labeled_y[n_seed:], sy[positions])

    def test_plain_final_state_depends_only_on_labeled_final(self, small_split, prior, tm, um):
        result = run(small_split, prior, tm, um, LearnerConfig(em_enabled=False))
        refit = fit_supervised(prior, result.labeled_x, result.labeled_y)
        assert max_param_diff(result.final_state, refit) < 1e-10


class TestEmScheduling:
    def test_em_invocations_equal_query_count(self, small_split, prior, tm, um):
        result = run(small_split, prior, tm, um, LearnerConfig(em_enabled=True))
        assert result.query_count > 0
        assert result.em_refine_calls == result.query_count

    def test_plain_never_invokes_em(self, small_split, prior, tm, um):
        result = run(small_split, prior, tm, um, LearnerConfig(em_enabled=False))
        assert result.em_refine_calls == 0

    def test_full_stream_pool_runs_em_at_init(self, small_split, prior, tm, um):
        result = run(small_split, prior, tm, um, LearnerConfig(em_enabled=True, em_pool_policy="full_stream"))
        assert result.em_refine_calls == result.query_count + 1


class TestCurves:
    def test_metric_curves_have_query_count_plus_one_entries(self, small_split, prior, tm, um):
        for config in (LearnerConfig(), LearnerConfig(em_enabled=True)):
            result = run(small_split, prior, tm, um, config)
            for curve in result.metric_curves.values():
                assert len(curve) == result.query_count + 1

    def test_metrics_within_unit_interval(self, small_split, prior, tm, um):
        result = run(small_split, prior, tm, um, LearnerConfig())
        for curve in result.metric_curves.values():
            assert all(0.0 <= v <= 1.0 for v in curve)


class TestValidation:
    def test_empty_labeled_seed_rejected(self, small_split, prior, tm, um):
        import dataclasses

        bad = dataclasses.replace(small_split, labeled_seed=[])
        with pytest.raises(ValueError, match="labeled_seed"):
            run(bad, prior, tm, um, LearnerConfig())

    def test_learner_config_validation(self):
        with pytest.raises(ValueError, match="em_tol"):
            LearnerConfig(em_tol=0.0)
        with pytest.raises(ValueError, match="em_max_iter"):
            LearnerConfig(em_max_iter=0)
        with pytest.raises(ValueError, match="em_pool_policy"):
            LearnerConfig(em_pool_policy="everything")

    def test_explicit_test_set_is_used(self, small_split, prior, tm, um):
        result_default = run(small_split, prior, tm, um, LearnerConfig())
        tiny = small_split.test[:10]
        result_tiny = run(small_split, prior, tm, um, LearnerConfig(), test_set=tiny)
        assert result_tiny.query_count == result_default.query_count
        assert result_tiny.metric_curves != result_default.metric_curves


class TestRunResultSerialization:
    def test_to_dict_round_trips_through_json(self, small_split, prior, tm, um):
        result = run(small_split, prior, tm, um, LearnerConfig(em_enabled=True), seed=9)
        blob = json.loads(json.dumps(result.to_dict()))
        assert blob["query_count"] == result.query_count
        assert blob["seed"] == 9
        assert len(blob["step_records"]) == len(small_split.unlabeled_stream)
        assert blob["config"]["em_enabled"] is True
        assert len(blob["metric_curves"]["macro_f1"]) == result.query_count + 1

