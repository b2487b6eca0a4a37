"""Evaluation metrics: decision accuracy and macro-averaged f1.

Decision accuracy compares the actions an agent would take from the
classifier's posteriors against the actions of an agent holding perfect
state information.  It is deliberately coarser than label accuracy:
confusions between states that share an optimal action cost nothing.
"""

from __future__ import annotations

import numpy as np

from .dataset import Observation, to_arrays
from .decision import TransitionModel, UtilityModel, optimal_policy, state_action_values
from .gmm import N_CLASSES, ClassifierState, predict_posterior


def decision_accuracy_from_posteriors(
    posteriors: np.ndarray,
    y_true: np.ndarray,
    tm: TransitionModel,
    um: UtilityModel,
) -> float:
    """Fraction of points where the belief-MEU action matches the
    perfect-information action for the true state."""
    posteriors = np.asarray(posteriors, dtype=float)
    y_true = np.asarray(y_true, dtype=int)
    if len(posteriors) == 0:
        raise ValueError("cannot evaluate decision accuracy on an empty set")
    v = state_action_values(tm, um)
    chosen = np.argmax(posteriors @ v.T, axis=1)
    optimal = optimal_policy(tm, um)[y_true - 1]
    return float(np.mean(chosen == optimal))


def decision_accuracy(
    state: ClassifierState,
    test: list[Observation],
    tm: TransitionModel,
    um: UtilityModel,
) -> float:
    """Decision accuracy of ``state`` on a held-out test set."""
    if not test:
        raise ValueError("cannot evaluate decision accuracy on an empty test set")
    _, x, y = to_arrays(test)
    return decision_accuracy_from_posteriors(predict_posterior(state, x), y, tm, um)


def macro_f1_from_predictions(y_pred: np.ndarray, y_true: np.ndarray) -> float:
    """Unweighted mean of per-class f1 over all four classes.

    A class with zero precision-plus-recall contributes f1 = 0, so a
    degenerate predictor is penalised rather than skipped.
    """
    y_pred = np.asarray(y_pred, dtype=int)
    y_true = np.asarray(y_true, dtype=int)
    if len(y_true) == 0:
        raise ValueError("cannot evaluate f1 on an empty set")
    f1s = np.zeros(N_CLASSES)
    for k in range(1, N_CLASSES + 1):
        tp = np.sum((y_pred == k) & (y_true == k))
        n_pred = np.sum(y_pred == k)
        n_true = np.sum(y_true == k)
        precision = tp / n_pred if n_pred else 0.0
        recall = tp / n_true if n_true else 0.0
        if precision + recall > 0:
            f1s[k - 1] = 2.0 * precision * recall / (precision + recall)
    return float(f1s.mean())


def macro_f1(state: ClassifierState, test: list[Observation]) -> float:
    """Macro f1 of the argmax-posterior labels on a held-out test set."""
    if not test:
        raise ValueError("cannot evaluate f1 on an empty test set")
    _, x, y = to_arrays(test)
    y_pred = np.argmax(predict_posterior(state, x), axis=1) + 1
    return macro_f1_from_predictions(y_pred, y)
