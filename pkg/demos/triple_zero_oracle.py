"""Closed-form check of the zero search on a constant medium.

For a constant index eta == 4 the characteristic function has the closed
form d(k) = -sin^3(k)/k, so its zeros are k = n*pi, each of multiplicity 3.
The script runs the black-box contour search against that oracle and prints
the error of every located zero.
"""

import math

import numpy as np

from tevp import ConstantProfile, count_zeros, find_zeros

profile = ConstantProfile(4.0)

print("argument-principle count over [0.5, 10.2*pi] x [-1, 1]:",
      count_zeros(profile, (0.5, 10.2 * math.pi, -1.0, 1.0)),
      "(expect 30 = 10 triple zeros)")

report = find_zeros(profile, (0.5, 10.2 * math.pi, 0.0, 1.0))
print(f"\n{'n':>3} {'k found':>22} {'mult':>4} {'|k - n*pi|':>12}")
for n, z in enumerate(report.zeros, start=1):
    err = abs(z.k - n * math.pi)
    print(f"{n:>3} {z.k.real:>22.15f} {z.multiplicity:>4} {err:>12.3e}")

# the closed form itself, for comparison at a few points
ks = np.linspace(1.0, 10.0, 7)
oracle = -np.sin(ks) ** 3 / ks
print("\nclosed form -sin^3(k)/k at sample k:",
      np.array2string(oracle, precision=6))
