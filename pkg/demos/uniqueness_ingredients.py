"""Computable ingredients of the spectral uniqueness statements.

Uniqueness itself is not an algorithm, but its two working parts are
checkable: the subinterval arithmetic that converts knowledge of the index
near the boundary into knowledge of the transformed potential, and the
Wronskian identity that turns an integral of the potential difference into
boundary data.  The script evaluates both for the example medium.
"""

import math

import numpy as np
from scipy.integrate import quad

from tevp import (get_profile, load_scenario, subinterval_boundary,
                  theorem3_epsilon, theorem4_threshold, travel_time,
                  wronskian_g)

profile = get_profile("colton_example")
a = travel_time(profile)
print(f"travel time a = {a:.10f}  (> 1, so the subinterval theory applies)")

res = theorem3_epsilon(profile)
eps1 = subinterval_boundary(profile, 0.5 * (a + 1.0))
print(f"epsilon  (mass (a-1)/2 from the boundary) = {res.epsilon:.10f}")
print(f"epsilon1 (mass (a+1)/2 from the boundary) = {eps1:.10f}")
mass, _ = quad(lambda r: math.sqrt(float(profile.eta(r))), eps1, res.epsilon)
print(f"optical mass between them = {mass:.12f}  (exactly 1 by construction)")

print(f"\ndensity threshold at the boundary mass: "
      f"{theorem4_threshold(a, 0.5 * (a - 1.0))} (exact)")

scenario = load_scenario({
    "q": "colton_example",
    "q_tilde": {"base": "colton_example",
                "bump": {"amplitude": 0.8, "center": 0.3, "width": 0.2}},
    "agree_from": 0.6,
})
print("\nWronskian identity, q~ = q + bump supported in [0.1, 0.5]:")
print(f"{'k':>12} {'|g|':>12} {'|g_int - g_wron|':>18}")
rng = np.random.default_rng(0)
for k in (0.5, 3.0, 11.0, 2.0 + 1.5j,
          complex(rng.uniform(-30, 30), rng.uniform(0, 3))):
    g_int, g_wron = wronskian_g(scenario, k)
    print(f"{str(k):>12} {abs(g_int):>12.4e} {abs(g_int - g_wron):>18.3e}")
