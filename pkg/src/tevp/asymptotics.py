"""Closed-form spectral predictions and their comparison against computed zeros.

Covers: the transcendental equation z - lambda*log z = w whose solution
drives the non-real eigenvalue asymptotics, the per-regime prediction
formulas (travel time a > 1, a < 1, a = 1), the two-term real-eigenvalue
asymptotics, the counting law N(r) ~ 4r/pi, and a matcher that pairs
computed zeros with predictions and tracks the residual sequence.

Branch convention: the '+' sequence lies in the upper half-plane and the
'-' sequence is its lower-half mirror.  Computed zeros are canonical
first-quadrant representatives, so the matcher compares them against the
'+' predictions and the conjugated '-' predictions.
"""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CaseMismatch, IterationDiverged, RegimeError
from .profiles import LiouvilleData, RefractiveProfile, travel_time

__all__ = [
    "AsymptoticCase",
    "MatchedPair",
    "MatchReport",
    "case_from_profile",
    "solve_transcendental",
    "predict_nonreal",
    "predict_real",
    "match",
    "counting_check",
    "write_match_csv",
]

_REGIMES = ("a_gt_1", "a_lt_1", "a_eq_1")


@dataclass
class AsymptoticCase:
    """Inputs of the non-real eigenvalue prediction formulas.

    ``m`` is the contact order at the outer boundary: eta^(u)(1) = 0 for
    u = 1..m+1 and eta_deriv = eta^(m+2)(1) != 0.  ``q_mean`` (the full
    integral of the transformed potential) enters only when a = 1.
    """
    regime: str
    m: int
    eta_deriv: float
    a: float
    q_mean: float = 0.0

    def __post_init__(self):
        if self.regime not in _REGIMES:
            raise ValueError(f"regime must be one of {_REGIMES}")
        if self.m < 0:
            raise ValueError("m must be a nonnegative integer")
        if self.eta_deriv == 0.0:
            raise ValueError("eta_deriv must be nonzero")
        if self.regime == "a_eq_1" and self.q_mean == 0.0:
            raise ValueError("the a = 1 regime requires a nonzero q_mean")

    def check_regime(self):
        tag = ("a_gt_1" if self.a > 1.0 + 1e-9
               else "a_lt_1" if self.a < 1.0 - 1e-9 else "a_eq_1")
        if tag != self.regime:
            raise CaseMismatch(
                f"travel time a={self.a} inconsistent with regime {self.regime}")


def case_from_profile(profile: RefractiveProfile,
                      liouville: LiouvilleData | None = None,
                      max_order: int = 4) -> AsymptoticCase:
    """Build the prediction inputs from a profile's boundary derivatives."""
    a = travel_time(profile)
    m = None
    for j in range(2, max_order + 1):
        dj = float(profile.eta(1.0, deriv=j))
        if abs(dj) > 1e-10:
            m = j - 2
            eta_deriv = dj
            break
    if m is None:
        raise ValueError(
            f"eta^(j)(1) = 0 for j = 2..{max_order}: contact order out of reach")
    regime = ("a_gt_1" if a > 1.0 + 1e-9
              else "a_lt_1" if a < 1.0 - 1e-9 else "a_eq_1")
    q_mean = 0.0
    if regime == "a_eq_1":
        from .profiles import liouville_transform
        q_mean = (liouville or liouville_transform(profile)).q_mean
    return AsymptoticCase(regime=regime, m=m, eta_deriv=eta_deriv, a=a,
                          q_mean=q_mean)


# ---------------------------------------------------------------------------
# transcendental equation
# ---------------------------------------------------------------------------


def solve_transcendental(lam: float, w: complex, tol: float = 1e-12) -> complex:
    """Solve z - lam*log z = w by fixed point z <- w + lam*log z.

    Principal branch throughout; seeded by z0 = w + lam*log w, valid in the
    asymptotic regime |w| >= 10(1+|lam|) where the iteration contracts.
    """
    w = complex(w)
    if lam == 0.0:
        return w
    if abs(w) < 10.0 * (1.0 + abs(lam)):
        raise ValueError(f"|w|={abs(w):.3g} too small for the asymptotic regime")
    z = w + lam * cmath.log(w)
    for _ in range(100):
        z_new = w + lam * cmath.log(z)
        if abs(z_new - z) <= 0.1 * tol * (1.0 + abs(z_new)):
            z = z_new
            break
        z = z_new
    # Near the branch cut the plain iteration can oscillate between the two
    # sides of the cut; a few Newton steps on f(z) = z - lam*log z - w settle
    # it (f' = 1 - lam/z is ~1 in the asymptotic regime).
    for _ in range(50):
        f = z - lam * cmath.log(z) - w
        if abs(f) <= tol:
            break
        z = z - f / (1.0 - lam / z)
    resid = abs(z - lam * cmath.log(z) - w)
    if resid > tol:
        raise IterationDiverged(
            f"iteration stalled: residual {resid:.3e} for lam={lam}, w={w}")
    return z


# ---------------------------------------------------------------------------
# predictions
# ---------------------------------------------------------------------------


def _branch_sign(branch) -> int:
    if branch in (1, "+", "plus"):
        return 1
    if branch in (-1, "-", "minus"):
        return -1
    raise ValueError(f"branch must be '+' or '-', got {branch!r}")


def predict_nonreal(case: AsymptoticCase, n: int, branch,
                    refine: bool = False) -> complex:
    """Leading-order non-real zero prediction k_n^branch, principal log.

    With ``refine=True`` (supported for a > 1 with even m), the prediction
    is sharpened by solving the exact transcendental reduction
    z -/+ ((m+2)/2) log z = w_n instead of dropping the residual term.
    """
    if n < 1:
        raise ValueError("index n must be >= 1")
    case.check_regime()
    s = _branch_sign(branch)
    m, ed = case.m, case.eta_deriv
    sgn_m = (1.0 if s == 1 else (-1.0) ** m)

    if refine and case.regime == "a_gt_1" and m % 2 == 0:
        mu = 0.5 * (m + 2)
        L = cmath.log((2.0 ** (m + 4)) / ed)
        try:
            if s == 1:
                z = solve_transcendental(-mu, n * math.pi * 1j - 0.5 * L)
            else:
                z = solve_transcendental(mu, n * math.pi * 1j + 0.5 * L)
            return -1j * z
        except ValueError:
            pass  # |w| too small; fall through to the leading-order formula

    npi = n * math.pi
    if case.regime == "a_gt_1":
        arg = 4.0 * (2.0 * npi * 1j) ** (m + 2) / (sgn_m * ed)
        return npi + s * 0.5j * cmath.log(arg)
    if case.regime == "a_lt_1":
        arg = -4.0 * (2.0 * npi * 1j) ** (m + 2) / (sgn_m * ed)
        return npi / case.a + s * 0.5j / case.a * cmath.log(arg)
    sgn_m1 = (1.0 if s == 1 else (-1.0) ** (m + 1))
    arg = -8.0 * (2.0 * npi * 1j) ** (m + 1) * case.q_mean / (sgn_m1 * ed)
    return npi + s * 0.5j * cmath.log(arg)


def predict_real(liouville: LiouvilleData, n: int) -> float:
    """Two-term asymptotic real zero: sqrt(n^2 pi^2/(a-1)^2 + intq/(a-1))."""
    a = liouville.a
    if abs(a - 1.0) < 1e-6:
        raise RegimeError("real-zero asymptotics require a != 1")
    if n < 1:
        raise ValueError("index n must be >= 1")
    val = (n * math.pi / (a - 1.0)) ** 2 + liouville.q_mean / (a - 1.0)
    return math.sqrt(val)


# ---------------------------------------------------------------------------
# matching
# ---------------------------------------------------------------------------


@dataclass
class MatchedPair:
    n: int
    branch: str
    predicted: complex
    computed: complex
    residual: float


@dataclass
class MatchReport:
    matched: list
    unmatched_zeros: list          # computed non-real zeros left unpaired
    unmatched_predictions: list    # (n, branch) indices left unpaired
    index_shift: int               # global shift applied to the formula index

    def max_residual(self, n_lo: int, n_hi: int) -> float:
        vals = [p.residual for p in self.matched if n_lo <= p.n <= n_hi]
        return max(vals) if vals else 0.0

    def partial_sums_bounded(self) -> bool:
        """l^2 proxy: partial sums of residual^2 stay below the window bound."""
        sq = [p.residual ** 2 for p in sorted(self.matched, key=lambda p: p.n)]
        total = sum(sq)
        run = 0.0
        for v in sq:
            run += v
            if run > total + 1e-15:
                return False
        return True


def _predictions(case, n_lo, n_hi, refine):
    preds = {}
    for n in range(n_lo, n_hi + 1):
        preds[(n, "+")] = predict_nonreal(case, n, "+", refine=refine)
        km = predict_nonreal(case, n, "-", refine=refine)
        preds[(n, "-")] = km.conjugate()      # first-quadrant representative
    return preds


def match(zeros, case: AsymptoticCase, n_window=None,
          refine: bool = True) -> MatchReport:
    """Pair computed non-real zeros with Theorem-style predictions.

    ``zeros`` is a SearchReport or a list of SpectralZero.  The absolute
    offset between the formula index and the zero ordering is not fixed by
    the asymptotics, so a global shift in {-1, 0, +1} is chosen to minimize
    the total residual and reported.
    """
    zlist = [z for z in (zeros.zeros if hasattr(zeros, "zeros") else zeros)
             if z.cls == "nonreal"]
    if not zlist:
        return MatchReport([], [], [], 0)
    if n_window is None:
        lo = max(1, int(min(z.k.real for z in zlist) / math.pi) - 2)
        hi = int(max(z.k.real for z in zlist) / math.pi) + 3
    else:
        lo, hi = n_window

    best = None
    for shift in (-1, 0, 1):
        if lo + shift < 1:
            continue
        preds = _predictions(case, lo + shift, hi + shift, refine)
        pairs, un_z = _greedy_match(zlist, preds)
        total = sum(p.residual for p in pairs) + 10.0 * len(un_z)
        if best is None or total < best[0]:
            used = {(p.n, p.branch) for p in pairs}
            un_p = sorted(k for k in preds if k not in used)
            best = (total, MatchReport(pairs, un_z, un_p, shift))
    return best[1]


def _greedy_match(zlist, preds):
    """Nearest-prediction assignment, each prediction used once."""
    items = sorted(preds.items(), key=lambda kv: kv[1].real)
    taken = set()
    pairs, unmatched = [], []
    for z in sorted(zlist, key=lambda z: z.k.real):
        best_key, best_d = None, math.inf
        for key, pk in items:
            if key in taken:
                continue
            d = abs(z.k - pk)
            if d < best_d - 1e-15:
                best_key, best_d = key, d
        if best_key is None or best_d > 0.5 * math.pi:
            unmatched.append(z)
            continue
        taken.add(best_key)
        pairs.append(MatchedPair(n=best_key[0], branch=best_key[1],
                                 predicted=preds[best_key], computed=z.k,
                                 residual=best_d))
    return pairs, unmatched


# ---------------------------------------------------------------------------
# counting law
# ---------------------------------------------------------------------------


def counting_check(zeros, radii):
    """Rows (r, N(r), N(r)*pi/(4r)) for the non-real counting law.

    N(r) counts all four symmetric copies {k, -k, conj k, -conj k} of each
    non-real zero, with multiplicity, in |k| <= r.
    """
    zlist = [z for z in (zeros.zeros if hasattr(zeros, "zeros") else zeros)
             if z.cls == "nonreal"]
    rows = []
    for r in radii:
        N = sum(z.multiplicity * len(z.symmetric_copies())
                for z in zlist if abs(z.k) <= r)
        rows.append((float(r), N, N * math.pi / (4.0 * r)))
    return rows


def write_match_csv(path, report: MatchReport):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "branch", "re_pred", "im_pred",
                    "re_comp", "im_comp", "abs_residual"])
        for p in sorted(report.matched, key=lambda p: (p.n, p.branch)):
            w.writerow([p.n, p.branch,
                        f"{p.predicted.real:.12e}", f"{p.predicted.imag:.12e}",
                        f"{p.computed.real:.12e}", f"{p.computed.imag:.12e}",
                        f"{p.residual:.6e}"])
