"""Computable ingredients of the uniqueness theorems.

The uniqueness statements themselves are not algorithms; what is checkable
numerically is (a) the subinterval arithmetic linking the known part of the
profile to the known part of the transformed potential, (b) the identity
between the two expressions for the Wronskian function

    g(k) = int_0^{x0} (q~ - q) phi phi~ dx
         = phi~'(a,k) phi(a,k) - phi~(a,k) phi'(a,k),

valid when q = q~ on [x0, a], and (c) the eigenvalue-density threshold
alpha > a + 1 - 2b.  This module verifies those ingredients; it makes no
attempt to reconstruct a profile from spectra.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import quad, solve_ivp as _scipy_solve_ivp

from .errors import RegimeError
from .profiles import (LiouvilleData, RefractiveProfile, liouville_transform,
                       load_profile, subinterval_boundary, travel_time)

__all__ = [
    "UniquenessScenario",
    "SubintervalResult",
    "smooth_bump",
    "theorem3_epsilon",
    "wronskian_g",
    "theorem4_threshold",
    "density_estimate",
    "density_report",
    "load_scenario",
]


def smooth_bump(amplitude: float, center: float, width: float) -> Callable:
    """C-infinity bump A*exp(-1/(1-t^2)), t = (x-center)/width, support |t|<1."""
    def bump(x):
        x = np.asarray(x, dtype=float)
        t = (x - center) / width
        inside = np.abs(t) < 1.0
        t_safe = np.where(inside, t, 0.0)
        with np.errstate(divide="ignore", over="ignore"):
            v = np.where(inside, np.exp(-1.0 / (1.0 - t_safe ** 2)), 0.0)
        return amplitude * v
    return bump


@dataclass
class UniquenessScenario:
    """A potential pair (q, q~) on [0, a] agreeing on [x0, a].

    ``phi_slope`` is phi'(0): eta(0)^{-1/4} when the potential comes from a
    profile, 1.0 for a raw potential pair (the Wronskian identity holds for
    any common normalization).
    """
    q: Callable
    q_tilde: Callable
    a: float
    x0: float
    phi_slope: float = 1.0
    b: float | None = None
    alpha: float | None = None

    def __post_init__(self):
        if not (0.0 < self.x0 <= self.a):
            raise ValueError(f"agreement point x0={self.x0} outside (0, a]")
        grid = np.linspace(self.x0, self.a, 257)
        gap = float(np.max(np.abs(np.asarray(self.q(grid))
                                  - np.asarray(self.q_tilde(grid)))))
        if gap > 1e-10:
            raise ValueError(
                f"potentials differ by {gap:.3e} on the agreement interval")


class SubintervalResult(NamedTuple):
    epsilon: float        # inner endpoint of the known subinterval of eta
    x0: float             # Liouville image: q is known on [x0, a]


def theorem3_epsilon(profile: RefractiveProfile) -> SubintervalResult:
    """The subinterval endpoint with optical mass (a-1)/2 from the boundary.

    Knowing eta on [epsilon, 1] is equivalent to knowing the transformed
    potential on [(a+1)/2, a].
    """
    a = travel_time(profile)
    if a <= 1.0:
        raise RegimeError(f"travel time a={a:.6f} <= 1; no subinterval condition")
    eps = subinterval_boundary(profile, 0.5 * (a - 1.0))
    return SubintervalResult(epsilon=eps, x0=0.5 * (a + 1.0))


# ---------------------------------------------------------------------------
# Wronskian function
# ---------------------------------------------------------------------------


def _phi_solution(q, a, k, phi_slope, tol=1e-12):
    """Dense solution of phi'' + (k^2 - q)phi = 0, phi(0)=0, phi'(0)=slope."""
    kk = complex(k) ** 2

    def rhs(x, w):
        return [w[1], (q(x) - kk) * w[0]]

    sol = _scipy_solve_ivp(rhs, (0.0, a),
                           np.array([0.0, phi_slope], dtype=complex),
                           method="DOP853", rtol=tol, atol=tol,
                           dense_output=True,
                           max_step=0.5 / max(1.0, abs(complex(k))))
    if not sol.success:
        raise RuntimeError(f"IVP for phi failed at k={k}: {sol.message}")
    return sol


def wronskian_g(scenario: UniquenessScenario, k: complex, tol: float = 1e-12):
    """g(k) computed two independent ways: quadrature and boundary Wronskian.

    Returns (g_integral, g_wronskian).  For a certified scenario the two
    agree to integration accuracy; their difference is the identity check.
    """
    sol = _phi_solution(scenario.q, scenario.a, k, scenario.phi_slope, tol)
    sol_t = _phi_solution(scenario.q_tilde, scenario.a, k, scenario.phi_slope, tol)

    def integrand_re(x):
        return ((scenario.q_tilde(x) - scenario.q(x))
                * sol.sol(x)[0] * sol_t.sol(x)[0]).real

    def integrand_im(x):
        return ((scenario.q_tilde(x) - scenario.q(x))
                * sol.sol(x)[0] * sol_t.sol(x)[0]).imag

    re, _ = quad(integrand_re, 0.0, scenario.x0, epsabs=1e-13, epsrel=1e-12,
                 limit=200)
    im, _ = quad(integrand_im, 0.0, scenario.x0, epsabs=1e-13, epsrel=1e-12,
                 limit=200)
    g_int = complex(re, im)

    phi_a, dphi_a = sol.y[:, -1]
    phit_a, dphit_a = sol_t.y[:, -1]
    g_wron = dphit_a * phi_a - phit_a * dphi_a
    return g_int, g_wron


# ---------------------------------------------------------------------------
# density threshold
# ---------------------------------------------------------------------------


def theorem4_threshold(a: float, b: float) -> float:
    """The density threshold a + 1 - 2b for the known-mass parameter b.

    The boundary b = (a-1)/2 gives exactly 2, the largest admissible value.
    """
    if a <= 1.0:
        raise RegimeError(f"travel time a={a:.6f} <= 1")
    if b < 0.5 * (a - 1.0) - 1e-12:
        raise RegimeError(f"b={b} below the minimum mass (a-1)/2")
    # (a - 2b) + 1 rather than a + 1 - 2b: exact when b = (a-1)/2, since
    # a - 1 and the halving are both exact in binary floating point
    thr = (a - 2.0 * b) + 1.0
    if not (0.0 <= thr <= 2.0):
        raise ValueError(f"threshold {thr} outside [0, 2]: b out of range")
    return thr


def density_estimate(zeros, r: float, select: Callable | None = None) -> float:
    """alpha_hat = N_D(r) * pi / (2r) for a subset D of non-real zeros.

    Counts all four symmetric copies with multiplicity in |k| <= r.
    ``select`` filters the canonical zeros (default: all non-real).
    """
    zlist = [z for z in (zeros.zeros if hasattr(zeros, "zeros") else zeros)
             if z.cls == "nonreal"]
    if select is not None:
        zlist = [z for z in zlist if select(z)]
    N = sum(z.multiplicity * len(z.symmetric_copies())
            for z in zlist if abs(z.k) <= r)
    return N * math.pi / (2.0 * r)


def density_report(zeros, r: float, a: float, b: float,
                   select: Callable | None = None) -> dict:
    """Finite-r density estimate against the Theorem-4 style threshold.

    The hypothesis concerns the r -> infinity limit; this is an estimate at
    one radius and is labeled as such.
    """
    alpha_hat = density_estimate(zeros, r, select)
    thr = theorem4_threshold(a, b)
    return {
        "r": float(r),
        "alpha_hat": alpha_hat,
        "threshold": thr,
        "would_satisfy_at_this_r": bool(alpha_hat > thr),
        "note": "finite-radius estimate of an asymptotic density",
    }


# ---------------------------------------------------------------------------
# scenario files
# ---------------------------------------------------------------------------


def _potential_from_ref(ref):
    """A (q, a, phi_slope) triple from a scenario potential reference.

    Accepts a profile name/path (string), or a dict with either
    {"profile": ref} or {"base": ref, "bump": {"amplitude", "center",
    "width"}} adding a compactly supported perturbation to the base
    potential.
    """
    if isinstance(ref, str):
        profile = load_profile(ref)
        lv = liouville_transform(profile)
        slope = float(profile.eta(0.0)) ** (-0.25)
        return lv.q, lv.a, slope
    if isinstance(ref, dict):
        if "profile" in ref:
            return _potential_from_ref(ref["profile"])
        if "base" in ref:
            q0, a, slope = _potential_from_ref(ref["base"])
            bump = ref.get("bump")
            if bump is None:
                return q0, a, slope
            pert = smooth_bump(bump["amplitude"], bump["center"], bump["width"])
            return (lambda x, q0=q0, pert=pert: np.asarray(q0(x)) + pert(x),
                    a, slope)
    raise ValueError(f"unrecognized potential reference {ref!r}")


def load_scenario(path_or_dict) -> UniquenessScenario:
    """Build a scenario from a JSON file or an equivalent dict.

    Schema: {"q": ref, "q_tilde": ref, "agree_from": x0, "b": ..,
    "alpha": ..}; see _potential_from_ref for the potential references.
    """
    if isinstance(path_or_dict, dict):
        data = path_or_dict
    else:
        with open(path_or_dict) as fh:
            data = json.load(fh)
    q, a, slope = _potential_from_ref(data["q"])
    qt, a_t, slope_t = _potential_from_ref(data["q_tilde"])
    if abs(a - a_t) > 1e-10:
        raise ValueError(f"travel times differ: {a} vs {a_t}")
    if abs(slope - slope_t) > 1e-10:
        raise ValueError("normalizations phi'(0) differ between the potentials")
    return UniquenessScenario(q=q, q_tilde=qt, a=a,
                              x0=float(data["agree_from"]),
                              phi_slope=slope,
                              b=data.get("b"), alpha=data.get("alpha"))
