"""riskal: risk-based active learning for maintenance decision support.

A statistical classifier streamed over monitoring data queries
ground-truth labels (structural inspections) only when the expected
value of perfect information exceeds the inspection cost, and
counteracts the resulting sampling bias with semi-supervised
expectation-maximisation over a Bayesian Gaussian mixture.
"""

from .active_learning import LearnerConfig, RunResult, StepRecord, run
from .dataset import (
    DatasetConfig,
    DatasetSplit,
    Observation,
    generate,
    load_csv,
    save_csv,
    split,
    to_arrays,
)
from .decision import (
    DO_NOTHING,
    REPAIR,
    TransitionModel,
    UtilityModel,
    default_transition_model,
    default_utility_model,
    evpi,
    expected_utility,
    meu,
    meu_perfect_info,
    optimal_action_given_state,
    optimal_policy,
)
from .experiment import (
    AggregateReport,
    ExperimentConfig,
    align_curves,
    emit,
    run_experiment,
)
from .gmm import (
    ClassifierState,
    ConjugatePrior,
    default_prior,
    em_refine,
    fit_supervised,
    penalized_log_posterior,
    predict_posterior,
)
from .metrics import decision_accuracy, macro_f1

__version__ = "0.1.0"

__all__ = [
    "AggregateReport",
    "ClassifierState",
    "ConjugatePrior",
    "DO_NOTHING",
    "DatasetConfig",
    "DatasetSplit",
    "ExperimentConfig",
    "LearnerConfig",
    "Observation",
    "REPAIR",
    "RunResult",
    "StepRecord",
    "TransitionModel",
    "UtilityModel",
    "align_curves",
    "decision_accuracy",
    "default_prior",
    "default_transition_model",
    "default_utility_model",
    "em_refine",
    "emit",
    "evpi",
    "expected_utility",
    "fit_supervised",
    "generate",
    "load_csv",
    "macro_f1",
    "meu",
    "meu_perfect_info",
    "optimal_action_given_state",
    "optimal_policy",
    "penalized_log_posterior",
    "predict_posterior",
    "run",
    "run_experiment",
    "save_csv",
    "split",
    "to_arrays",
]
