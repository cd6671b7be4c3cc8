from __future__ import annotations

import math

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special as sp

from hairclip.special import SERIES_LIMIT, BesselDomainError, bessel_j_quarter, besselj, first_zero

import oracles


@given(nu=st.floats(0.0, 2.0), x=st.floats(0.0, 50.0))
def test_besselj_matches_mpmath(nu, x):
    # scipy.special.jv underflows to 0 for subnormal-scale x, so the property oracle is mpmath
    assert besselj(nu, x) == pytest.approx(float(mpmath.besselj(nu, x)), abs=2e-12)


@given(nu=st.floats(0.0, 2.0), x=st.floats(1e-6, 50.0))
def test_besselj_matches_scipy(nu, x):
    assert besselj(nu, x) == pytest.approx(sp.jv(nu, x), abs=2e-12)


@given(nu=st.floats(0.01, 2.0), x=st.floats(1e-300, 1e-8))
def test_besselj_small_argument_leading_term(nu, x):
    lead = math.exp(nu * math.log(0.5 * x) - math.lgamma(nu + 1.0))
    assert besselj(nu, x) == pytest.approx(lead, rel=1e-12)


@pytest.mark.parametrize("x", [0.1, 1.0, 2.78, 5.0, 11.99, 12.01, 20.0, 49.0])
def test_quarter_order_against_scipy(x):
    assert bessel_j_quarter(x) == pytest.approx(sp.jv(0.25, x), abs=1e-12)


def test_continuity_across_branch_switch():
    below = besselj(0.25, SERIES_LIMIT)
    above = besselj(0.25, math.nextafter(SERIES_LIMIT, math.inf))
    assert abs(below - above) < 1e-12


def test_value_at_zero():
    assert besselj(0.0, 0.0) == 1.0
    assert besselj(0.25, 0.0) == 0.0


@pytest.mark.parametrize("nu,x", [(-0.5, 1.0), (0.25, -1.0), (0.25, math.nan)])
def test_domain_errors(nu, x):
    with pytest.raises(BesselDomainError):
        besselj(nu, x)


def test_first_zero_against_scipy_root():
    assert first_zero(0.25) == pytest.approx(oracles.jv_zero(0.25), abs=1e-13)


@given(nu=st.floats(0.0, 1.0))
def test_first_zero_is_a_root_for_other_orders(nu):
    z = first_zero(nu)
    assert abs(sp.jv(nu, z)) < 1e-12
    assert z == pytest.approx(oracles.jv_zero(nu), abs=1e-12)


def test_first_zero_integer_orders_against_tables():
    assert first_zero(0.0) == pytest.approx(sp.jn_zeros(0, 1)[0], abs=1e-13)
    assert first_zero(1.0) == pytest.approx(sp.jn_zeros(1, 1)[0], abs=1e-13)
