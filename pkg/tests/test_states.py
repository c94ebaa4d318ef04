import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import assert_density, probs, quarter
from hidden_gtnl.bellineq import closed_form_B
from hidden_gtnl.errors import DegenerateOutcome, NotXState, ValidationError
from hidden_gtnl.qlin import DensityMatrix, ket, projector, trace_distance
from hidden_gtnl.states import (GHZ, Family, StateFamilyParams, XStateParams, extract_x_params,
                                make_family, make_rho1, make_rho2, make_rho3,
                                make_rho4_closed_form, make_x_state)

GHZ_P = projector(GHZ)


def test_family_examples():
    assert np.allclose(make_rho2(1), GHZ_P)
    assert np.allclose(make_rho1(0.3, 0), projector(ket("001")))
    assert np.allclose(make_rho3(np.pi / 4, 1), GHZ_P)


def test_rho4_examples():
    assert np.allclose(make_rho4_closed_form(np.pi / 4, np.pi / 4, 1), GHZ_P)
    assert np.allclose(make_rho4_closed_form(0.1, 0.3, 0), projector(ket("100")))
    b = closed_form_B(Family.RHO4, StateFamilyParams(theta1=0.1, theta3=0.144, p3=0.5055))
    assert b.value == pytest.approx(4.001, abs=2e-3)


def test_rho4_degenerate():
    with pytest.raises(DegenerateOutcome):
        make_rho4_closed_form(0.0, 0.3, 0.0)
    with pytest.raises(DegenerateOutcome):
        make_rho4_closed_form(0.0, 0.0, 0.7)


def test_parameter_ranges():
    with pytest.raises(ValidationError):
        StateFamilyParams(theta1=1.0)
    with pytest.raises(ValidationError):
        StateFamilyParams(p2=-0.1)
    with pytest.raises(ValidationError):
        make_rho1(0.1, 1.5)
    with pytest.raises(ValidationError):
        Family.parse("rho9")
    assert Family.parse("RHO2") is Family.RHO2


@pytest.mark.property
def test_rho4_grid_is_valid_density():
    grid = np.linspace(0, np.pi / 4, 10)
    for t1, t3, p3 in itertools.product(grid, grid, np.linspace(0, 1, 10)):
        try:
            rho = make_rho4_closed_form(t1, t3, p3)
        except DegenerateOutcome:
            assert np.sin(t1) ** 2 + p3 * np.cos(2 * t1) * np.sin(t3) ** 2 < 1e-14
            continue
        assert_density(rho)


def test_extract_examples():
    x = extract_x_params(GHZ_P)
    assert x.a[0] == pytest.approx(0.5) and x.b[0] == pytest.approx(0.5)
    assert x.gamma[0] == pytest.approx(0.5)
    assert np.allclose(x.a[1:], 0) and np.allclose(x.gamma[1:], 0)
    x = extract_x_params(np.eye(8) / 8)
    assert np.allclose(x.a, 1 / 8) and np.allclose(x.b, 1 / 8) and np.allclose(x.gamma, 0)


def test_extract_rho4_matches_direct_entries():
    t1, t3, p3 = 0.1, 0.3, 0.5
    d = np.sin(t1) ** 2 + p3 * np.cos(2 * t1) * np.sin(t3) ** 2
    x = extract_x_params(make_rho4_closed_form(t1, t3, p3))
    assert x.a[0] == pytest.approx(p3 * (np.cos(t1) * np.sin(t3)) ** 2 / d, abs=1e-14)
    assert x.b[0] == pytest.approx(p3 * (np.sin(t1) * np.cos(t3)) ** 2 / d, abs=1e-14)
    assert x.gamma[0] == pytest.approx(
        p3 * np.cos(t1) * np.sin(t3) * np.sin(t1) * np.cos(t3) / d, abs=1e-14)
    # |100> is basis index 4, paired with index 3: b[3]
    assert x.b[3] == pytest.approx((1 - p3) * np.sin(t1) ** 2 / d, abs=1e-14)


def test_not_x_state():
    psi = (ket("000") + ket("001")) / np.sqrt(2)
    with pytest.raises(NotXState):
        extract_x_params(projector(psi))


def test_x_params_validation():
    with pytest.raises(ValidationError):
        XStateParams((0.5, 0, 0, 0), (0.4, 0, 0, 0), (0, 0, 0, 0))
    with pytest.raises(ValidationError):
        XStateParams((0.5, 0, 0, 0), (0.5, 0, 0, 0), (0.6, 0, 0, 0))


def _x_params(draw_vals):
    w = np.asarray(draw_vals[:8]) + 1e-3
    w = w / w.sum()
    a, b = w[:4], w[4:]
    r = np.asarray(draw_vals[8:12]) * np.sqrt(a * b)
    ph = np.asarray(draw_vals[12:16]) * 2 * np.pi
    return XStateParams(a, b, r * np.exp(1j * ph))


@settings(max_examples=200)
@given(st.lists(st.floats(0, 1), min_size=16, max_size=16))
def test_x_roundtrip(vals):
    x = _x_params(vals)
    y = extract_x_params(make_x_state(x))
    assert np.allclose(x.a, y.a, atol=1e-12)
    assert np.allclose(x.b, y.b, atol=1e-12)
    assert np.allclose(x.gamma, y.gamma, atol=1e-12)


@settings(max_examples=100)
@given(quarter, probs, st.floats(-1e-3, 1e-3))
def test_rho1_continuity(t, p, dp):
    q = min(max(p + dp, 0.0), 1.0)
    assert trace_distance(make_rho1(t, p), make_rho1(t, q)) <= 2 * abs(q - p) + 1e-12


@settings(max_examples=100)
@given(quarter, probs, probs, quarter, probs)
def test_families_are_density_matrices(t1, p1, p2, t3, p3):
    params = StateFamilyParams(t1, p1, p2, t3, p3)
    for fam in Family:
        try:
            rho = make_family(fam, params)
        except DegenerateOutcome:
            continue
        assert isinstance(rho, DensityMatrix)
        assert_density(rho)
        extract_x_params(rho)
