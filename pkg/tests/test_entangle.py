import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import probs, quarter
from hidden_gtnl.bellineq import closed_form_B
from hidden_gtnl.entangle import cgm_family, cgm_pure, cgm_xstate
from hidden_gtnl.errors import DegenerateOutcome, ValidationError
from hidden_gtnl.qlin import ket, projector
from hidden_gtnl.states import (GHZ, Family, StateFamilyParams, XStateParams, extract_x_params,
                                make_family, make_rho4_closed_form)


def test_cgm_xstate_examples():
    assert cgm_xstate(extract_x_params(projector(GHZ))) == pytest.approx(1)
    assert cgm_xstate(XStateParams([0.25, 0, 0, 0.25], [0.25, 0, 0, 0.25], [0] * 4)) == 0
    t1, t3, p3 = 0.1, 0.3, 0.5
    d = np.sin(t1) ** 2 + p3 * np.cos(2 * t1) * np.sin(t3) ** 2
    ref = p3 * np.sin(2 * t1) * np.sin(2 * t3) / (2 * d)
    assert cgm_xstate(extract_x_params(make_rho4_closed_form(t1, t3, p3))) == pytest.approx(ref, abs=1e-12)


def test_cgm_pure_examples():
    assert cgm_pure(GHZ) == pytest.approx(1)
    assert cgm_pure(ket("000")) == pytest.approx(0, abs=1e-7)
    t = 0.37
    assert cgm_pure(np.cos(t) * ket("000") + np.sin(t) * ket("111")) == pytest.approx(np.sin(2 * t))
    # biseparable: one cut is pure
    bell = (ket("00") + ket("11")) / np.sqrt(2)
    assert cgm_pure(np.kron(bell, ket("0"))) == pytest.approx(0, abs=1e-7)
    with pytest.raises(ValidationError):
        cgm_pure(2 * ket("000"))


def test_cgm_family_examples():
    assert cgm_family(Family.RHO2, StateFamilyParams(p2=0.7)) == pytest.approx(0.7)
    assert cgm_family(Family.RHO1, StateFamilyParams(p1=0)) == 0
    with pytest.raises(DegenerateOutcome):
        cgm_family(Family.RHO4, StateFamilyParams(theta1=0, p3=0))


@pytest.mark.property
def test_family_agrees_with_xstate_on_grid():
    ang = np.linspace(0, np.pi / 4, 6)
    pr = np.linspace(0, 1, 6)
    for t1, t3, p in itertools.product(ang, ang, pr):
        params = StateFamilyParams(t1, p, p, t3, p)
        for fam in Family:
            try:
                ref = cgm_family(fam, params)
            except DegenerateOutcome:
                continue
            got = cgm_xstate(extract_x_params(make_family(fam, params)))
            assert got == pytest.approx(ref, abs=1e-10)


@settings(max_examples=200)
@given(st.lists(st.floats(0, 1), min_size=16, max_size=16))
def test_cgm_in_unit_interval(vals):
    w = np.asarray(vals[:8]) + 1e-3
    w = w / w.sum()
    a, b = w[:4], w[4:]
    g = np.asarray(vals[8:12]) * np.sqrt(a * b) * np.exp(2j * np.pi * np.asarray(vals[12:]))
    c = cgm_xstate(XStateParams(a, b, g))
    assert 0 <= c <= 1


@settings(max_examples=300)
@given(quarter, probs, probs, quarter, probs)
def test_sine_branch_biconditional(t1, p1, p2, t3, p3):
    params = StateFamilyParams(t1, p1, p2, t3, p3)
    for fam in Family:
        try:
            b = closed_form_B(fam, params)
        except DegenerateOutcome:
            continue
        c = cgm_family(fam, params)
        assert (b.sine > 4) == (c > 1 / math.sqrt(2))
