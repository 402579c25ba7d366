import json
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from tevp.errors import MassOutOfRange
from tevp.profiles import (ChebyshevProfile, ColtonExampleProfile,
                           ConstantProfile, get_profile, liouville_transform,
                           load_profile, profile_from_dict, profile_to_dict,
                           subinterval_boundary, travel_time)


def test_registry_and_aliases():
    assert isinstance(get_profile("const1"), ConstantProfile)
    assert get_profile("const4").eta(0.3) == 4.0
    with pytest.raises(KeyError):
        get_profile("no_such_profile")


def test_constant_profile_basics():
    p = ConstantProfile(4.0)
    r = np.linspace(0, 1, 11)
    assert_allclose(p.eta(r), 4.0)
    assert_allclose(p.eta(r, deriv=1), 0.0)
    assert travel_time(p) == pytest.approx(2.0, abs=1e-14)


def test_colton_travel_time_closed_form():
    p = ColtonExampleProfile()
    assert abs(travel_time(p) - math.log(3.0)) <= 1e-10


def test_colton_eta_values_and_boundary_derivatives():
    p = ColtonExampleProfile()
    # eta = 16 / ((1+r)^2 (3-r)^2)
    r = np.array([0.0, 0.3, 0.7, 1.0])
    expect = 16.0 / ((1 + r) ** 2 * (3 - r) ** 2)
    assert_allclose(p.eta(r), expect, rtol=1e-14)
    assert p.eta(1.0) == pytest.approx(1.0, abs=1e-14)
    assert p.eta(1.0, deriv=1) == pytest.approx(0.0, abs=1e-14)
    assert p.eta(1.0, deriv=2) == pytest.approx(1.0, abs=1e-12)


def test_colton_map_roundtrip():
    p = ColtonExampleProfile()
    cmap = p.cumulative_map()
    r = np.linspace(0.0, 1.0, 23)
    x = cmap(r)
    assert_allclose(x, ColtonExampleProfile.x_exact(r), atol=1e-12)
    back = np.array([cmap.inverse(xv) for xv in np.atleast_1d(x)])
    assert_allclose(back, r, atol=1e-12)


def test_liouville_constant_potential():
    # the example profile transforms to the constant potential q = 1/4
    lv = liouville_transform(ColtonExampleProfile())
    xs = np.linspace(0.0, lv.a, 57)
    assert_allclose(lv.q(xs), 0.25, atol=1e-9)
    assert lv.q_mean == pytest.approx(0.25 * lv.a, abs=1e-9)


def test_liouville_trivial_for_unit_eta():
    lv = liouville_transform(ConstantProfile(1.0))
    assert lv.a == pytest.approx(1.0, abs=1e-14)
    assert_allclose(lv.q(np.linspace(0, 1, 11)), 0.0, atol=1e-12)


def test_subinterval_boundary_mass_identity():
    p = ColtonExampleProfile()
    a = travel_time(p)
    eps = subinterval_boundary(p, 0.5 * (a - 1.0))
    # closed-form scalar equation ln((3-eps)/(1+eps)) = (ln 3 - 1)/2
    assert math.log((3 - eps) / (1 + eps)) == pytest.approx(
        0.5 * (math.log(3.0) - 1.0), abs=1e-11)
    with pytest.raises(MassOutOfRange):
        subinterval_boundary(p, 2.0 * a)
    with pytest.raises(MassOutOfRange):
        subinterval_boundary(p, -0.1)


def test_chebyshev_profile_matches_function():
    # eta(r) = 2 - r^2 is degree 2, so the Chebyshev fit is exact
    xs = np.linspace(0, 1, 9)
    coeffs = np.polynomial.chebyshev.Chebyshev.fit(
        xs, 2 - xs ** 2, 2, domain=[0, 1]).coef
    p = ChebyshevProfile(coeffs, normalized_tail=False)
    r = np.linspace(0, 1, 33)
    assert_allclose(p.eta(r), 2 - r ** 2, atol=1e-12)
    assert_allclose(p.eta(r, deriv=1), -2 * r, atol=1e-10)


def test_positivity_rejected():
    with pytest.raises(ValueError):
        ConstantProfile(-1.0)


def test_normalized_tail_enforced():
    with pytest.raises(ValueError):
        ConstantProfile(4.0, normalized_tail=True)  # eta(1) = 4 != 1


def test_profile_dict_roundtrip(tmp_path):
    p = get_profile("raised_cosine")
    d = profile_to_dict(p)
    p2 = profile_from_dict(d)
    r = np.linspace(0, 1, 17)
    assert_allclose(p2.eta(r), p.eta(r), rtol=1e-14)

    path = tmp_path / "prof.json"
    path.write_text(json.dumps({"kind": "named", "name": "colton_example"}))
    p3 = load_profile(str(path))
    assert abs(travel_time(p3) - math.log(3.0)) <= 1e-10


def test_load_profile_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_profile("definitely_not_a_profile_or_file")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(json.JSONDecodeError):
        load_profile(str(bad))


def test_travel_time_equals_map_endpoint():
    p = get_profile("slow_core")
    assert travel_time(p) == pytest.approx(float(p.cumulative_map()(1.0)),
                                           abs=1e-13)
