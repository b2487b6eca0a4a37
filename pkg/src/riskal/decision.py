"""Maintenance decision process: expected utility, MEU and value of information.

The decision problem is a single-step influence diagram.  At each time
instance an agent holds a belief ``p(y_t)`` over four structural health
states and picks a binary action ``d_t`` (0 = do nothing, 1 = repair).
The next state ``y_{t+1}`` follows an action-conditioned transition
model, and utility attaches to the reached state and to the action
itself.  The expected value of perfect information (EVPI) of the current
state is the gap between deciding after observing ``y_t`` and deciding
from the belief alone; a label query (structural inspection) is worth
making when the EVPI exceeds the inspection cost.

All operations are pure functions over immutable value objects and
accept either a single belief vector of shape ``(4,)`` or a batch of
shape ``(n, 4)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

N_CLASSES = 4
N_ACTIONS = 2

DO_NOTHING = 0
REPAIR = 1

_ROW_SUM_TOL = 1e-12
_POSTERIOR_SUM_TOL = 1e-9
# Negative EVPI beyond this magnitude indicates an implementation bug,
# not floating-point noise.
_EVPI_ROUNDING_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class TransitionModel:
    """Action-conditioned health-state transition probabilities.

    ``p[a, i, j]`` is the probability of moving from state ``i + 1`` to
    state ``j + 1`` under action ``a``.  Each of the two 4x4 matrices
    must be row-stochastic; this is validated at construction and never
    assumed afterwards.
    """

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.shape != (N_ACTIONS, N_CLASSES, N_CLASSES):
            raise ValueError(
                f"transition model must have shape {(N_ACTIONS, N_CLASSES, N_CLASSES)}, "
                f"got {p.shape}"
            )
        if not np.all(np.isfinite(p)):
            raise ValueError("transition probabilities must be finite")
        if np.any(p < 0.0) or np.any(p > 1.0):
            raise ValueError("transition probabilities must lie in [0, 1]")
        row_sums = p.sum(axis=2)
        if np.any(np.abs(row_sums - 1.0) > _ROW_SUM_TOL):
            worst = np.max(np.abs(row_sums - 1.0))
            raise ValueError(
                f"transition rows must sum to 1 within {_ROW_SUM_TOL}; "
                f"worst deviation {worst:.3e}"
            )
        object.__setattr__(self, "p", p)

    def to_dict(self) -> dict:
        return {
            "do_nothing": self.p[DO_NOTHING].tolist(),
            "repair": self.p[REPAIR].tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TransitionModel":
        return cls(p=np.array([d["do_nothing"], d["repair"]], dtype=float))


@dataclass(frozen=True, eq=False)
class UtilityModel:
    """Utilities over reached states and actions, plus the inspection cost.

    Defaults encode a plant that earns full utility while functional
    (states 1 and 2), reduced utility under significant damage (state 3)
    and a heavy penalty on failure (state 4); repair costs 30 and an
    inspection costs 7.
    """

    u_state: np.ndarray = field(default_factory=lambda: np.array([10.0, 10.0, 5.0, -75.0]))
    u_action: np.ndarray = field(default_factory=lambda: np.array([0.0, -30.0]))
    c_ins: float = 7.0

    def __post_init__(self):
        u_state = np.asarray(self.u_state, dtype=float)
        u_action = np.asarray(self.u_action, dtype=float)
        if u_state.shape != (N_CLASSES,):
            raise ValueError(f"u_state must have length {N_CLASSES}, got shape {u_state.shape}")
        if u_action.shape != (N_ACTIONS,):
            raise ValueError(f"u_action must have length {N_ACTIONS}, got shape {u_action.shape}")
        if not (np.all(np.isfinite(u_state)) and np.all(np.isfinite(u_action))):
            raise ValueError("utilities must be finite")
        # +inf is allowed: it disables querying altogether.
        if np.isnan(self.c_ins) or self.c_ins < 0.0:
            raise ValueError(f"inspection cost must be >= 0, got {self.c_ins}")
        object.__setattr__(self, "u_state", u_state)
        object.__setattr__(self, "u_action", u_action)
        object.__setattr__(self, "c_ins", float(self.c_ins))

    def to_dict(self) -> dict:
        return {
            "u_state": self.u_state.tolist(),
            "u_action": self.u_action.tolist(),
            "c_ins": self.c_ins,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "UtilityModel":
        return cls(
            u_state=np.asarray(d["u_state"], dtype=float),
            u_action=np.asarray(d["u_action"], dtype=float),
            c_ins=float(d["c_ins"]),
        )


def default_transition_model() -> TransitionModel:
    """Default transition model: monotonic degradation / near-certain repair.

    Doing nothing lets the structure degrade with a propensity to remain
    in its current state, state 4 being absorbing.  Repairing returns
    the structure to the undamaged state with probability 0.99 and
    leaves it unchanged with probability 0.01.
    """
    p_do_nothing = [
        [0.8, 0.18, 0.015, 0.005],
        [0.0, 0.8, 0.15, 0.05],
        [0.0, 0.0, 0.8, 0.2],
        [0.0, 0.0, 0.0, 1.0],
    ]
    p_repair = [
        [1.0, 0.0, 0.0, 0.0],
        [0.99, 0.01, 0.0, 0.0],
        [0.99, 0.0, 0.01, 0.0],
        [0.99, 0.0, 0.0, 0.01],
    ]
    return TransitionModel(p=np.array([p_do_nothing, p_repair], dtype=float))


def default_utility_model() -> UtilityModel:
    return UtilityModel()


def state_action_values(tm: TransitionModel, um: UtilityModel) -> np.ndarray:
    """Expected utility of each (action, current state) pair.

    Returns a ``(2, 4)`` array ``v[a, i] = sum_j p[a, i, j] * u_state[j]
    + u_action[a]``, the building block for every quantity below.
    """
    return tm.p @ um.u_state + um.u_action[:, None]


def _validate_posterior(posterior) -> tuple[np.ndarray, bool]:
    """Check a belief vector (or batch of rows) is a simplex over 4 states.

    Returns the validated array and whether the input was a single vector.
    """
    p = np.asarray(posterior, dtype=float)
    single = p.ndim == 1
    if single:
        p = p[None, :]
    if p.ndim != 2 or p.shape[1] != N_CLASSES:
        raise ValueError(f"posterior must have {N_CLASSES} components, got shape {np.shape(posterior)}")
    if not np.all(np.isfinite(p)):
        raise ValueError("posterior contains non-finite entries")
    if np.any(p < -1e-12):
        raise ValueError(f"posterior has negative component (min {p.min():.3e})")
    dev = np.abs(p.sum(axis=1) - 1.0)
    if np.any(dev > _POSTERIOR_SUM_TOL):
        raise ValueError(
            f"posterior rows must sum to 1 within {_POSTERIOR_SUM_TOL}; "
            f"worst deviation {dev.max():.3e}"
        )
    return p, single


def expected_utility(posterior, action: int, tm: TransitionModel, um: UtilityModel):
    """Expected utility of taking ``action`` under belief ``posterior``.

    ``sum_i posterior_i * sum_j p[action, i, j] * u_state[j] + u_action[action]``.
    """
    if action not in (DO_NOTHING, REPAIR):
        raise ValueError(f"action must be 0 or 1, got {action}")
    p, single = _validate_posterior(posterior)
    v = state_action_values(tm, um)
    eu = p @ v[action]
    return float(eu[0]) if single else eu


def meu(posterior, tm: TransitionModel, um: UtilityModel):
    """Maximum expected utility and its maximising action.

    Ties break toward action 0 (do nothing).  Returns ``(action, value)``;
    for a batch of beliefs, both are arrays.
    """
    p, single = _validate_posterior(posterior)
    v = state_action_values(tm, um)
    eu = p @ v.T                      # (n, 2)
    actions = np.argmax(eu, axis=1)   # argmax picks action 0 on exact ties
    values = eu[np.arange(len(p)), actions]
    if single:
        return int(actions[0]), float(values[0])
    return actions, values


def meu_perfect_info(posterior, tm: TransitionModel, um: UtilityModel):
    """Expected utility when the state is revealed before acting.

    The max over actions moves inside the expectation:
    ``sum_i posterior_i * max_a v[a, i]``.
    """
    p, single = _validate_posterior(posterior)
    v = state_action_values(tm, um)
    best_per_state = v.max(axis=0)    # (4,)
    out = p @ best_per_state
    return float(out[0]) if single else out


def evpi(posterior, tm: TransitionModel, um: UtilityModel):
    """Expected value of perfect information about the current state.

    ``meu_perfect_info - meu``; non-negative by construction.  Tiny
    negative rounding (within 1e-9) is clamped to zero; anything larger
    raises, since it cannot arise from a correct evaluation.
    """
    p, single = _validate_posterior(posterior)
    v = state_action_values(tm, um)
    with_info = p @ v.max(axis=0)
    without_info = (p @ v.T).max(axis=1)
    gap = with_info - without_info
    if np.any(gap < -_EVPI_ROUNDING_TOL):
        raise RuntimeError(
            f"EVPI evaluated to {gap.min():.3e} < -{_EVPI_ROUNDING_TOL}; "
            "internal inconsistency between the two MEU evaluations"
        )
    gap = np.maximum(gap, 0.0)
    return float(gap[0]) if single else gap


def optimal_action_given_state(y: int, tm: TransitionModel, um: UtilityModel) -> int:
    """Best action for a known health state ``y`` (tie toward do-nothing)."""
    if y not in (1, 2, 3, 4):
        raise ValueError(f"health state must be in 1..4, got {y}")
    v = state_action_values(tm, um)
    return int(np.argmax(v[:, y - 1]))


def optimal_policy(tm: TransitionModel, um: UtilityModel) -> np.ndarray:
    """Perfect-information action for every state, as a length-4 array."""
    v = state_action_values(tm, um)
    return np.argmax(v, axis=0)
