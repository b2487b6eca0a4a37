"""Online risk-based active learning with optional semi-supervised updates.

The loop streams unlabeled observations in temporal order.  For each
point it computes the class posterior and the expected value of perfect
information; when the EVPI strictly exceeds the inspection cost the
ground-truth label is bought, the labeled set grows, and the classifier
is refit from the prior on the full labeled set.  In the semi-supervised
variant an EM refinement over the unlabeled pool follows every such
retrain (and only then, to bound computation).

Chosen actions are recorded but never fed back into the stream: the
trajectory is a fixed recording, and decisions are evaluated
counterfactually against the perfect-information policy.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import DatasetSplit, Observation, to_arrays
from .decision import (
    TransitionModel,
    UtilityModel,
    optimal_policy,
    state_action_values,
)
from .gmm import ClassifierState, ConjugatePrior, em_refine, fit_supervised, predict_posterior
from .metrics import decision_accuracy_from_posteriors, macro_f1_from_predictions

EM_POOL_POLICIES = ("seen_so_far", "full_stream")


@dataclass(frozen=True)
class LearnerConfig:
    """Scheduling knobs for the active-learning loop.

    ``em_pool_policy`` selects which unlabeled points feed the EM
    refinement: only those already streamed past (faithful to online
    operation) or the entire stream (for sensitivity studies).  The
    inspection cost itself lives on the :class:`UtilityModel`.
    """

    em_enabled: bool = False
    em_tol: float = 1e-6
    em_max_iter: int = 100
    em_pool_policy: str = "seen_so_far"

    def __post_init__(self):
        if self.em_tol <= 0:
            raise ValueError(f"em_tol must be positive, got {self.em_tol}")
        if self.em_max_iter < 1:
            raise ValueError(f"em_max_iter must be at least 1, got {self.em_max_iter}")
        if self.em_pool_policy not in EM_POOL_POLICIES:
            raise ValueError(f"em_pool_policy must be one of {EM_POOL_POLICIES}, got {self.em_pool_policy!r}")

    def to_dict(self) -> dict:
        return {
            "em_enabled": self.em_enabled,
            "em_tol": self.em_tol,
            "em_max_iter": self.em_max_iter,
            "em_pool_policy": self.em_pool_policy,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LearnerConfig":
        return cls(
            em_enabled=bool(d.get("em_enabled", False)),
            em_tol=float(d.get("em_tol", 1e-6)),
            em_max_iter=int(d.get("em_max_iter", 100)),
            em_pool_policy=d.get("em_pool_policy", "seen_so_far"),
        )


@dataclass(frozen=True, eq=False)
class StepRecord:
    """Everything observed and decided at one stream position.

    ``true_label`` and ``optimal_action`` are recorded for evaluation
    only; the learner itself saw them only if ``queried`` is set, in
    which case the chosen action is the perfect-information one.
    """

    t: int
    posterior: np.ndarray
    evpi_value: float
    queried: bool
    chosen_action: int
    true_label: int
    optimal_action: int

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "posterior": self.posterior.tolist(),
            "evpi_value": self.evpi_value,
            "queried": self.queried,
            "chosen_action": self.chosen_action,
            "true_label": self.true_label,
            "optimal_action": self.optimal_action,
        }


@dataclass
class RunResult:
    """Full record of one active-learning pass over a stream."""

    step_records: list[StepRecord]
    query_count: int
    labeled_x: np.ndarray
    labeled_y: np.ndarray
    metric_curves: dict[str, list[float]]
    final_state: ClassifierState
    em_refine_calls: int
    config: LearnerConfig
    seed: int
    queried_positions: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "seed": self.seed,
            "query_count": self.query_count,
            "em_refine_calls": self.em_refine_calls,
            "queried_positions": list(self.queried_positions),
            "labeled_x": self.labeled_x.tolist(),
            "labeled_y": self.labeled_y.tolist(),
            "metric_curves": {k: list(v) for k, v in self.metric_curves.items()},
            "step_records": [r.to_dict() for r in self.step_records],
            "final_state": self.final_state.to_dict(),
        }


def run(
    split: DatasetSplit,
    prior: ConjugatePrior,
    tm: TransitionModel,
    um: UtilityModel,
    config: LearnerConfig,
    test_set: list[Observation] | None = None,
    seed: int = 0,
) -> RunResult:
    """Execute one risk-based active-learning pass.

    The model is fit on the labeled seed, then the stream is consumed in
    order; a point whose EVPI strictly exceeds ``um.c_ins`` has its
    label revealed and triggers a retrain (plus EM refinement when
    enabled).  Test-set metrics are recorded at initialisation and after
    every retrain, so the curves have ``query_count + 1`` entries.

    The procedure is deterministic; ``seed`` is echoed into the result
    for provenance.
    """
    if not split.labeled_seed:
        raise ValueError("labeled_seed must be non-empty")
    test = split.test if test_set is None else test_set
    if not test:
        raise ValueError("test set must be non-empty")

    _, x_labeled, y_labeled = to_arrays(split.labeled_seed)
    t_stream, x_stream, y_stream = to_arrays(split.unlabeled_stream)
    _, x_test, y_test = to_arrays(test)
    n_stream = len(x_stream)

    v = state_action_values(tm, um)
    best_per_state = v.max(axis=0)
    policy = optimal_policy(tm, um)
    optimal_actions = policy[y_stream - 1] if n_stream else np.zeros(0, dtype=int)

    queried_mask = np.zeros(n_stream, dtype=bool)
    em_calls = 0

    def em_pool(upto: int) -> np.ndarray:
        limit = upto if config.em_pool_policy == "seen_so_far" else n_stream
        return x_stream[:limit][~queried_mask[:limit]]

    state = fit_supervised(prior, x_labeled, y_labeled)
    if config.em_enabled:
        pool = em_pool(0)
        if len(pool):
            # Pool starts empty under seen_so_far, in which case the
            # refinement would be an exact no-op and is skipped.
            state, _, _ = em_refine(state, x_labeled, y_labeled, pool, config.em_tol, config.em_max_iter)
            em_calls += 1

    def record_metrics(curves):
        post = predict_posterior(state, x_test)
        curves["decision_accuracy"].append(decision_accuracy_from_posteriors(post, y_test, tm, um))
        curves["macro_f1"].append(macro_f1_from_predictions(np.argmax(post, axis=1) + 1, y_test))

    curves: dict[str, list[float]] = {"decision_accuracy": [], "macro_f1": []}
    record_metrics(curves)

    records: list[StepRecord] = [None] * n_stream
    queried_positions: list[int] = []
    pos = 0
    while pos < n_stream:
        # The model only changes after a query, so the whole remaining
        # segment can be scored under the current state at once.
        posteriors = predict_posterior(state, x_stream[pos:])
        with_info = posteriors @ best_per_state
        eu = posteriors @ v.T
        without_info = eu.max(axis=1)
        evpi_vals = np.maximum(with_info - without_info, 0.0)
        meu_actions = np.argmax(eu, axis=1)

        fired = np.flatnonzero(evpi_vals > um.c_ins)
        stop = fired[0] if len(fired) else len(evpi_vals)
        for j in range(stop):
            i = pos + j
            records[i] = StepRecord(
                t=int(t_stream[i]),
                posterior=posteriors[j],
                evpi_value=float(evpi_vals[j]),
                queried=False,
                chosen_action=int(meu_actions[j]),
                true_label=int(y_stream[i]),
                optimal_action=int(optimal_actions[i]),
            )
        if stop == len(evpi_vals):
            break

        i = pos + stop
        records[i] = StepRecord(
            t=int(t_stream[i]),
            posterior=posteriors[stop],
            evpi_value=float(evpi_vals[stop]),
            queried=True,
            chosen_action=int(optimal_actions[i]),
            true_label=int(y_stream[i]),
            optimal_action=int(optimal_actions[i]),
        )
        queried_mask[i] = True
        queried_positions.append(int(i))
        x_labeled = np.vstack([x_labeled, x_stream[i : i + 1]])
        y_labeled = np.append(y_labeled, y_stream[i])

        state = fit_supervised(prior, x_labeled, y_labeled)
        if config.em_enabled:
            state, _, _ = em_refine(
                state, x_labeled, y_labeled, em_pool(i + 1), config.em_tol, config.em_max_iter
            )
            em_calls += 1
        record_metrics(curves)
        pos = i + 1

    return RunResult(
        step_records=records,
        query_count=len(queried_positions),
        labeled_x=x_labeled,
        labeled_y=y_labeled,
        metric_curves=curves,
        final_state=state,
        em_refine_calls=em_calls,
        config=config,
        seed=int(seed),
        queried_positions=queried_positions,
    )
