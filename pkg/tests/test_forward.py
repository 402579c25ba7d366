import cmath
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from tevp.forward import (characteristic, characteristic_batch,
                          log_derivative_batch, scaled_characteristic,
                          solve_ivp, steps_for)
from tevp.profiles import ConstantProfile


def _d_const4(k):
    """Closed form for eta == 4: d(k) = -sin(k)^3 / k."""
    k = complex(k)
    return -cmath.sin(k) ** 3 / k


CONST4 = ConstantProfile(4.0)


def test_scalar_characteristic_matches_closed_form():
    for k in (0.7, 3.2, 11.0, 2.0 + 1.5j, 9.0 - 2.0j):
        cv = characteristic(CONST4, k, tol=1e-13)
        assert cv.value() == pytest.approx(_d_const4(k), rel=1e-9, abs=1e-12)


def test_batch_characteristic_matches_closed_form():
    ks = np.array([0.5, 2.0, 7.0, 31.0, 3.0 + 2.0j, 20.0 + 4.0j, 0.1 - 0.2j])
    d_s, _, scale = characteristic_batch(CONST4, ks)
    expect = np.array([_d_const4(k) for k in ks])
    got = d_s * np.exp(scale)
    assert_allclose(got, expect, rtol=5e-11, atol=1e-13)


def test_log_derivative_closed_form():
    # d'/d = 3 cot k - 1/k for eta == 4
    ks = np.array([1.1, 2.7, 14.0, 2.0 + 1.0j])
    ld = log_derivative_batch(CONST4, ks)
    expect = 3.0 / np.tan(ks.astype(complex)) - 1.0 / ks
    assert_allclose(ld, expect, rtol=1e-10)


def test_derivative_vs_finite_difference():
    h = 1e-6
    for k in (2.3, 8.1, 4.0 + 2.5j):
        cv = characteristic(CONST4, k, tol=1e-13)
        fd = (_d_const4(k + h) - _d_const4(k - h)) / (2.0 * h)
        d_prime = cv.d_prime * np.exp(cv.scale_log)
        assert d_prime == pytest.approx(fd, rel=1e-8)


def test_small_k_series_path():
    # d is entire; the k -> 0 limit must be finite and smooth
    cv0 = characteristic(CONST4, 1e-6, tol=1e-13)
    cv1 = characteristic(CONST4, 1e-4, tol=1e-13)
    # d(k) = -sin^3 k / k ~ -k^2 near 0
    assert cv0.value() == pytest.approx(-1e-12, rel=1e-5)
    assert cv1.value() == pytest.approx(-1e-8, rel=1e-5)


def test_batch_scalar_cross_check_generic_profile(colton):
    ks = np.array([5.0, 17.0, 12.0 + 3.0j, 40.0 + 5.0j])
    d_s, dp_s, scale = characteristic_batch(colton, ks)
    for i, k in enumerate(ks):
        cv = characteristic(colton, complex(k), tol=1e-13)
        rel = abs(d_s[i] * np.exp(scale[i]) - cv.value()) / abs(cv.value())
        assert rel < 1e-9
        ld_batch = dp_s[i] / d_s[i]
        ld_scalar = cv.d_prime / cv.d
        assert abs(ld_batch - ld_scalar) / abs(ld_scalar) < 1e-8


def test_large_imaginary_part_no_overflow(colton):
    # growth exp((1+a)|Im k|) would overflow unscaled around |Im k| ~ 350
    k = np.array([5.0 + 400.0j])
    d_s, _, scale = characteristic_batch(colton, k)
    assert np.isfinite(d_s).all()
    assert scale[0] > 700.0     # the removed factor is genuinely huge


def test_scaled_characteristic_bounded_on_rays(colton):
    ks = np.array([3.0, 30.0, 3.0 + 3.0j, 30.0 + 6.0j, 1.0 + 10.0j])
    D = scaled_characteristic(colton, ks)
    assert np.all(np.abs(D) < 50.0)


def test_solve_ivp_boundary_values_and_init():
    # eta == 1: y = sin(kr)/k, y' = cos(kr)
    p1 = ConstantProfile(1.0)
    k = 3.7
    bv = solve_ivp(p1, k, tol=1e-13)
    assert bv.y1 * np.exp(bv.scale_log) == pytest.approx(math.sin(k) / k,
                                                         abs=1e-11)
    assert bv.dy1 * np.exp(bv.scale_log) == pytest.approx(math.cos(k),
                                                          abs=1e-11)
    # second solution via init override: y2 = cos(kr), Wronskian = -k... use
    # y2(0)=1, y2'(0)=0 -> y2 = cos(kr); W(y1,y2) = y1 y2' - y1' y2 = -1
    bv2 = solve_ivp(p1, k, tol=1e-13, init=(1.0, 0.0))
    W = bv.y1 * bv2.dy1 - bv.dy1 * bv2.y1
    assert W == pytest.approx(-1.0, abs=1e-10)


def test_tol_validation():
    with pytest.raises(ValueError):
        solve_ivp(CONST4, 1.0, tol=1e-3)
    with pytest.raises(ValueError):
        characteristic(CONST4, 1.0, tol=1e-16)


def test_steps_scale_with_k():
    assert steps_for(CONST4, 100.0) >= 2 * steps_for(CONST4, 50.0) - 1
    assert steps_for(CONST4, 0.1) == 64   # floor
