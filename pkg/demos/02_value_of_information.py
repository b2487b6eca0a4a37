#!/usr/bin/env python3
"""Explore the maintenance decision process and the value of information.

EVPI is the gap between deciding after observing the true health state
and deciding from the belief alone.  A label query (inspection, cost 7)
is only worth buying where that gap exceeds the cost, which happens when
enough belief mass sits on the critical state for repair to be in play,
but not so much that repair is already the obvious choice.
"""

import numpy as np

from riskal import (
    default_transition_model,
    default_utility_model,
    evpi,
    expected_utility,
    meu,
    meu_perfect_info,
    optimal_policy,
)

tm = default_transition_model()
um = default_utility_model()

print("expected utility of each (state, action):")
for label in range(1, 5):
    one_hot = np.zeros(4)
    one_hot[label - 1] = 1.0
    eu0 = expected_utility(one_hot, 0, tm, um)
    eu1 = expected_utility(one_hot, 1, tm, um)
    print(f"  state {label}: do nothing {eu0:8.2f}   repair {eu1:8.2f}")
print(f"perfect-information policy (0=do nothing, 1=repair): {optimal_policy(tm, um).tolist()}")

print("\nbeliefs mixing 'undamaged' with 'critical':")
print(f"{'p(critical)':>12} {'meu':>9} {'perfect':>9} {'evpi':>8}  query?")
for q in np.linspace(0.0, 1.0, 11):
    belief = np.array([1.0 - q, 0.0, 0.0, q])
    action, value = meu(belief, tm, um)
    v = evpi(belief, tm, um)
    flag = "yes" if v > um.c_ins else ""
    print(f"{q:12.1f} {value:9.3f} {meu_perfect_info(belief, tm, um):9.3f} {v:8.3f}  {flag}")

print("\nuniform belief (maximum confusion):")
u = np.full(4, 0.25)
print(f"  meu={meu(u, tm, um)[1]:.4f}, perfect={meu_perfect_info(u, tm, um):.4f}, "
      f"evpi={evpi(u, tm, um):.4f} > c_ins={um.c_ins} -> would query")

print("\nbelief split across two do-nothing states carries no value of information:")
half = np.array([0.5, 0.5, 0.0, 0.0])
print(f"  evpi={evpi(half, tm, um):.4f} (both states share the optimal action)")
