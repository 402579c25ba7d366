import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import trapezoid

from tevp.forward import solve_ivp
from tevp.kernel import (boundary_traces, representation_boundary,
                         solve_kernel, write_kernel_csv)
from tevp.profiles import ConstantProfile, get_profile, liouville_transform


def test_zero_potential_gives_zero_kernel():
    lv = liouville_transform(ConstantProfile(1.0))
    kg = solve_kernel(lv, h=lv.a / 100)
    assert np.max(np.abs(kg.K)) <= 1e-14
    assert kg.iterations <= 2


def test_discrete_diagonal_identity(colton_lv):
    kg = solve_kernel(colton_lv, h=colton_lv.a / 200)
    # the scheme reproduces 2K(x,x) = Q(x) to machine precision
    assert kg.discrete_diagonal_defect() <= 1e-13
    assert np.max(np.abs(kg.K[:, 0])) == 0.0


def test_diagonal_residual_order2():
    lv = liouville_transform(get_profile("raised_cosine"))
    r1 = solve_kernel(lv, h=lv.a / 200).diagonal_residual()
    r2 = solve_kernel(lv, h=lv.a / 400).diagonal_residual()
    assert 3.0 <= r1 / r2 <= 5.0


def test_trace_endpoint_identity(colton_lv):
    kg = solve_kernel(colton_lv, h=colton_lv.a / 400)
    _, K1, K2 = boundary_traces(kg)
    qa = float(colton_lv.q(colton_lv.a))
    assert K1[-1] + K2[-1] == pytest.approx(0.5 * qa, abs=5e-4)
    assert 0.5 * qa == 0.125    # the example profile's constant potential


def test_trace_sum_identity(colton_lv):
    # K1(t) + K2(t) = q((a+t)/2)/2 + int_{(a+t)/2}^a q(tau) K(tau, a+t-tau)
    kg = solve_kernel(colton_lv, h=colton_lv.a / 400)
    a = colton_lv.a
    t, K1, K2 = boundary_traces(kg)
    for idx in (len(t) // 4, len(t) // 2, 3 * len(t) // 4):
        tt = t[idx]
        taus = np.linspace(0.5 * (a + tt), a, 801)
        vals = colton_lv.q(taus) * np.array(
            [kg.at(x, a + tt - x) for x in taus])
        rhs = 0.5 * float(colton_lv.q(0.5 * (a + tt))) + trapezoid(vals, taus)
        assert K1[idx] + K2[idx] == pytest.approx(rhs, abs=1e-6)


def test_representation_matches_ivp(colton, colton_lv):
    kg_h = solve_kernel(colton_lv, h=colton_lv.a / 200)
    kg_h2 = solve_kernel(colton_lv, h=colton_lv.a / 400)
    ks = np.array([1.0, math.pi, 7.3, 15.0])
    y_h, dy_h = representation_boundary(colton_lv, kg_h, ks)
    y_h2, dy_h2 = representation_boundary(colton_lv, kg_h2, ks)
    y = (4.0 * y_h2 - y_h) / 3.0
    dy = (4.0 * dy_h2 - dy_h) / 3.0
    for i, k in enumerate(ks):
        bv = solve_ivp(colton, float(k), tol=1e-13)
        assert abs(y[i] - bv.y1 * np.exp(bv.scale_log)) <= 1e-5
        assert abs(dy[i] - bv.dy1 * np.exp(bv.scale_log)) <= 1e-5


def test_kernel_interpolation_consistency(colton_lv):
    kg = solve_kernel(colton_lv, h=colton_lv.a / 200)
    # interpolation at grid nodes returns the stored values
    assert kg.at(kg.x[20], kg.x[8]) == pytest.approx(kg.K[20, 8], abs=1e-15)
    with pytest.raises(ValueError):
        kg.at(0.1, 0.2)     # t > x is outside the triangle


def test_csv_dump(tmp_path, colton_lv):
    kg = solve_kernel(colton_lv, h=colton_lv.a / 20)
    out = tmp_path / "kernel.csv"
    write_kernel_csv(out, kg, stride=4)
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "x,t,K"
    assert len(lines) > 10


def test_convergence_reported(colton_lv):
    kg = solve_kernel(colton_lv, h=colton_lv.a / 100, tol=1e-12)
    assert kg.final_delta <= 1e-12 * (1.0 + np.max(np.abs(kg.K)))
    assert kg.iterations < 50
