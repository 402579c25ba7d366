"""Command-line front end.

Subcommands: profile-info, spectrum, asymptotics, kernel-check,
inverse-check.  Output is deterministic CSV/JSON; plotting is left to
external tools.  Exit codes: 0 success, 2 input error, 3 regime error,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from . import asymptotics as asym
from . import inverse as inv
from . import kernel as ker
from . import zeros as zmod
from .errors import (CaseMismatch, ContourTooClose, DegenerateCharacteristic,
                     IterationDiverged, MassOutOfRange, NewtonStall,
                     NoConvergence, QuadratureFailure, RegimeError,
                     StepUnderflow)
from .forward import scaled_characteristic, solve_ivp
from .profiles import (liouville_transform, load_profile,
                       subinterval_boundary, travel_time)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_REGIME = 3
EXIT_NUMERIC = 4

_REGIME_ERRORS = (RegimeError, CaseMismatch)
_NUMERIC_ERRORS = (ContourTooClose, NewtonStall, StepUnderflow, NoConvergence,
                   DegenerateCharacteristic, IterationDiverged,
                   QuadratureFailure)
_INPUT_ERRORS = (ValueError, KeyError, OSError, json.JSONDecodeError,
                 MassOutOfRange)


def _parse_rect(text):
    parts = [float(v) for v in text.split(",")]
    if len(parts) != 4:
        raise ValueError(f"--rect wants x0,x1,y0,y1, got {text!r}")
    return tuple(parts)


def _emit(args, payload, text_lines):
    if getattr(args, "json", False):
        out = json.dumps(payload, indent=2, sort_keys=True)
        print(out)
    else:
        for line in text_lines:
            print(line)
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_profile_info(args):
    profile = load_profile(args.profile)
    a = travel_time(profile)
    lv = liouville_transform(profile)
    regime = "a_gt_1" if a > 1 + 1e-9 else "a_lt_1" if a < 1 - 1e-9 else "a_eq_1"
    payload = {"profile": args.profile, "a": a, "q_mean": lv.q_mean,
               "regime": regime}
    lines = [f"a        = {a:.12g}",
             f"q_mean   = {lv.q_mean:.12g}",
             f"regime   = {regime}"]
    try:
        case = asym.case_from_profile(profile, liouville=lv)
        payload["m"] = case.m
        payload["eta_deriv"] = case.eta_deriv
        lines.append(f"m        = {case.m} (eta^({case.m + 2})(1) = {case.eta_deriv:.6g})")
    except ValueError:
        lines.append("m        = indeterminate (boundary derivatives vanish)")
    if regime == "a_eq_1":
        lines.append("warning: a = 1 — degenerate travel time regime")
    if a > 1 + 1e-9:
        eps = subinterval_boundary(profile, 0.5 * (a - 1.0))
        # representative b strictly above the minimum mass (a-1)/2
        b2 = 0.75 * (a - 1.0)
        eps2 = subinterval_boundary(profile, b2)
        payload["epsilon"] = eps
        payload["epsilon2"] = eps2
        payload["epsilon2_mass"] = b2
        lines.append(f"epsilon  = {eps:.12g}  (mass (a-1)/2)")
        lines.append(f"epsilon2 = {eps2:.12g}  (mass b = {b2:.6g})")
        try:
            eps1 = subinterval_boundary(profile, 0.5 * (a + 1.0))
            payload["epsilon1"] = eps1
            lines.append(f"epsilon1 = {eps1:.12g}  (mass (a+1)/2)")
        except MassOutOfRange:
            lines.append("epsilon1 = undefined (mass (a+1)/2 exceeds a)")
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_spectrum(args):
    profile = load_profile(args.profile)
    if args.rect is None:
        raise ValueError("spectrum requires --rect x0,x1,y0,y1")
    rect = _parse_rect(args.rect)
    report = zmod.find_zeros(profile, rect, tol=args.tol)
    lines = [f"zeros found: {len(report.zeros)} "
             f"(count {report.total_count_by_argument_principle} with multiplicity)"]
    for z in report.zeros:
        lines.append(f"  {z.k.real:+.9f} {z.k.imag:+.9f}  m={z.multiplicity}"
                     f"  {z.cls}  |D|={z.residual:.2e}")
    if args.out:
        zmod.write_zeros_csv(args.out, report.zeros)
        zmod.write_report_json(args.out + ".json", report)
        with open(args.out + ".scatter.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["re", "im"])
            for z in report.zeros:
                for c in z.symmetric_copies():
                    w.writerow([f"{c.real:.9e}", f"{c.imag:.9e}"])
        lines.append(f"wrote {args.out}, {args.out}.json, {args.out}.scatter.csv")
    if args.json:
        print(json.dumps(zmod.report_to_json(report), indent=2, sort_keys=True))
    else:
        for line in lines:
            print(line)
    return EXIT_OK


def cmd_asymptotics(args):
    profile = load_profile(args.profile)
    case = asym.case_from_profile(profile)
    if args.spectrum:
        zeros = _read_zeros_csv(args.spectrum)
    else:
        if args.rect is None:
            raise ValueError("asymptotics requires --rect or --spectrum")
        zeros = zmod.find_zeros(profile, _parse_rect(args.rect), tol=args.tol).zeros
    nonreal = [z for z in zeros if z.cls == "nonreal"]
    if nonreal and case.regime == "a_eq_1":
        raise RegimeError("spectrum regime check failed for a = 1")
    report = asym.match(zeros, case)
    radii = sorted({round(abs(z.k), 6) for z in nonreal})[-5:]
    counting = asym.counting_check(zeros, radii) if radii else []
    max_res = max((p.residual for p in report.matched), default=0.0)
    lines = [f"matched {len(report.matched)} zeros "
             f"(shift {report.index_shift}), max residual {max_res:.3e}",
             f"unmatched zeros: {len(report.unmatched_zeros)}"]
    for r, N, ratio in counting:
        lines.append(f"  counting r={r:8.3f}  N={N:4d}  N*pi/(4r)={ratio:.4f}")
    if args.out:
        asym.write_match_csv(args.out, report)
        lines.append(f"wrote {args.out}")
    payload = {
        "index_shift": report.index_shift,
        "matched": len(report.matched),
        "unmatched_zeros": len(report.unmatched_zeros),
        "max_residual": max_res,
        "counting": [{"r": r, "N": N, "ratio": ratio} for r, N, ratio in counting],
    }
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for line in lines:
            print(line)
    return EXIT_OK


def _read_zeros_csv(path):
    zeros = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            zeros.append(zmod.SpectralZero(
                k=complex(float(row["re_k"]), float(row["im_k"])),
                multiplicity=int(row["multiplicity"]),
                cls=row["class"], residual=float(row["residual"])))
    return zeros


def cmd_kernel_check(args):
    profile = load_profile(args.profile)
    lv = liouville_transform(profile)
    a = lv.a
    kg = ker.solve_kernel(lv, h=a / 200.0)
    kg2 = ker.solve_kernel(lv, h=a / 400.0)
    qa = float(lv.q(a))
    scale = max(1.0, lv.q_abs_integral())
    checks = []

    diag = kg2.diagonal_residual()
    checks.append(("diagonal identity 2K(x,x)=Q(x)", diag, 5e-4 * scale))
    checks.append(("K(x,0)=0 on the grid", float(np.max(np.abs(kg2.K[:, 0]))), 0.0))
    _, K1, K2 = ker.boundary_traces(kg2)
    checks.append((f"K1(a)+K2(a) = q(a)/2 = {0.5 * qa:.6g}",
                   abs(K1[-1] + K2[-1] - 0.5 * qa), 5e-4))
    ks = np.array([1.0, math.pi, 7.3, 15.0])
    y_h, dy_h = ker.representation_boundary(lv, kg, ks)
    y_h2, dy_h2 = ker.representation_boundary(lv, kg2, ks)
    y_ex = (4.0 * y_h2 - y_h) / 3.0
    dy_ex = (4.0 * dy_h2 - dy_h) / 3.0
    worst = 0.0
    for i, k in enumerate(ks):
        bv = solve_ivp(profile, float(k), tol=1e-13)
        worst = max(worst, abs(y_ex[i] - bv.y1), abs(dy_ex[i] - bv.dy1))
    checks.append(("boundary representation vs IVP (Richardson)", worst, 1e-5))

    ok = True
    lines = []
    payload = {"checks": []}
    for name, resid, bound in checks:
        passed = resid <= max(bound, 1e-15) or (bound == 0.0 and resid == 0.0)
        ok = ok and passed
        lines.append(f"[{'PASS' if passed else 'FAIL'}] {name}: "
                     f"residual {resid:.3e} (bound {bound:.1e})")
        payload["checks"].append({"name": name, "residual": resid,
                                  "bound": bound, "pass": passed})
    _emit(args, payload, lines)
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_inverse_check(args):
    if args.scenario:
        sc = inv.load_scenario(args.scenario)
    else:
        profile_ref = args.profile or "colton_example"
        profile = load_profile(profile_ref)
        a = travel_time(profile)
        if a <= 1.0:
            raise RegimeError("inverse-check default scenario needs a > 1")
        x0 = 0.5 * (a + 1.0)
        sc = inv.load_scenario({
            "q": profile_ref,
            "q_tilde": {"base": profile_ref,
                        "bump": {"amplitude": 0.8, "center": 0.25 * x0,
                                 "width": 0.2 * x0}},
            "agree_from": x0,
        })
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    n_k = 12 if args.fast else 50
    for _ in range(n_k):
        k = complex(rng.uniform(-30.0, 30.0), rng.uniform(0.0, 3.0))
        gi, gw = inv.wronskian_g(sc, k)
        worst = max(worst, abs(gi - gw) / max(1.0, abs(gi)))
    passed = worst <= 1e-8
    lines = [f"[{'PASS' if passed else 'FAIL'}] Wronskian two-way agreement: "
             f"worst {worst:.3e} over {n_k} random k (bound 1e-8)"]
    payload = {"wronskian_worst": worst, "samples": n_k, "pass": passed}
    if sc.b is not None:
        thr = inv.theorem4_threshold(sc.a if sc.a > 1 else 2.0, sc.b)
        payload["threshold"] = thr
        lines.append(f"density threshold a+1-2b = {thr:.6g}"
                     + (f" (claimed alpha = {sc.alpha})" if sc.alpha else ""))
    _emit(args, payload, lines)
    return EXIT_OK if passed else EXIT_NUMERIC


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _build_parser():
    p = argparse.ArgumentParser(
        prog="tevp",
        description="Transmission eigenvalues of spherically stratified media")
    sub = p.add_subparsers(dest="cmd", required=True)

    def common(sp, profile=True):
        if profile:
            sp.add_argument("--profile", required=False,
                            help="profile registry name or JSON path")
        sp.add_argument("--tol", type=float, default=1e-9)
        sp.add_argument("--out", help="output path")
        sp.add_argument("--json", action="store_true",
                        help="machine-readable JSON to stdout")

    sp = sub.add_parser("profile-info", help="travel time, regime, potentials")
    common(sp)
    sp.set_defaults(fn=cmd_profile_info)

    sp = sub.add_parser("spectrum", help="zeros of d in a rectangle")
    common(sp)
    sp.add_argument("--rect", help="x0,x1,y0,y1")
    sp.add_argument("--kmax", type=float, help="real-axis scan limit")
    sp.set_defaults(fn=cmd_spectrum)

    sp = sub.add_parser("asymptotics", help="match zeros against predictions")
    common(sp)
    sp.add_argument("--rect", help="x0,x1,y0,y1")
    sp.add_argument("--spectrum", help="zeros CSV from a previous spectrum run")
    sp.set_defaults(fn=cmd_asymptotics)

    sp = sub.add_parser("kernel-check", help="transmutation kernel oracle suite")
    common(sp)
    sp.set_defaults(fn=cmd_kernel_check)

    sp = sub.add_parser("inverse-check", help="Wronskian identity scenario suite")
    common(sp)
    sp.add_argument("--scenario", help="scenario JSON path")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--fast", action="store_true",
                    help="fewer sample points (12 instead of 50)")
    sp.set_defaults(fn=cmd_inverse_check)
    return p


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else 0
    try:
        if getattr(args, "profile", None) is None and args.fn in (
                cmd_profile_info, cmd_spectrum, cmd_asymptotics,
                cmd_kernel_check):
            raise ValueError("--profile is required for this subcommand")
        return args.fn(args)
    except _REGIME_ERRORS as exc:
        print(f"regime error: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except _NUMERIC_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except _INPUT_ERRORS as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
