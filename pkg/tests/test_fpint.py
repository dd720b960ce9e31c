import cmath
import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate
from scipy.special import digamma

from adsdn.errors import ExceptionalParameter, TailNotIntegrable
from adsdn.fpint import PolyhomSymbol, fp_integral, fp_monomial, fp_power_resolvent, power_resolvent_symbol


def test_fp_monomial_values():
    assert fp_monomial(-1, "unit_to_inf") == 0
    assert fp_monomial(2.0, "zero_to_unit") == pytest.approx(1 / 3)
    assert fp_monomial(2.0, "unit_to_inf") == pytest.approx(-1 / 3)
    assert fp_monomial(0.7, "full") == 0
    with pytest.raises(ValueError):
        fp_monomial(1.0, "nowhere")


def test_convergent_integral_is_ordinary():
    # beta with -1 < Re < 1: fp equals the ordinary integral
    nu, a = -0.3, 2.0  # xi^(0.4) / (xi^2 + 2)
    ref, _ = integrate.quad(lambda t: t ** (2 * nu + 1) / (t * t + a), 0, np.inf)
    assert abs(fp_power_resolvent(nu, -2, a) - ref) <= 1e-9 * abs(ref)


@settings(max_examples=25, deadline=None)
@given(
    st.floats(0.05, 2.9).filter(lambda v: abs(v - round(v)) > 0.02),
    st.floats(0.2, 5.0),
    st.floats(-2.5, 2.5),
    st.sampled_from([-2, -4, -6]),
)
def test_numeric_matches_closed_form(nu, r, phi, m):
    a = r * cmath.exp(1j * phi)
    ref = fp_power_resolvent(nu, m, a)
    assert abs(fp_integral(power_resolvent_symbol(nu, m, a)) - ref) <= 1e-8 * abs(ref)


def test_linearity_in_symbol():
    a = 1.5 + 0.5j
    s1, s2 = power_resolvent_symbol(0.3, -2, a), power_resolvent_symbol(0.3, -4, a)
    combined = PolyhomSymbol(
        core=lambda x: s1.core(x) + 2 * s2.core(x),
        terms_at_zero=(),
        terms_at_infinity=tuple(s1.terms_at_infinity) + tuple((2 * c, b) for c, b in s2.terms_at_infinity),
        xi_lo=s1.xi_lo,
        xi_hi=s1.xi_hi,
    )
    ref = fp_integral(s1) + 2 * fp_integral(s2)
    assert abs(fp_integral(combined) - ref) <= 1e-8 * abs(ref)


def test_split_additivity():
    sym = power_resolvent_symbol(0.7, -2, 2.0)
    moved = dataclasses.replace(sym, split=3.0)
    assert abs(fp_integral(moved) - fp_integral(sym)) <= 1e-9 * abs(fp_integral(sym))


@pytest.mark.parametrize("nu,m,a", [(0.3, -2, 1.0), (0.7 + 0.2j, -4, 2 - 1j), (1.25, -6, 0.5j)])
def test_nu_derivative_of_closed_form(nu, m, a):
    h = 1e-5
    fd = (fp_power_resolvent(nu + h, m, a) - fp_power_resolvent(nu - h, m, a)) / (2 * h)
    F = fp_power_resolvent(nu, m, a)
    exact = F * (cmath.log(a) + digamma(1 + nu) - digamma(-1 - nu - m / 2))
    assert abs(fd - exact) <= 1e-5 * abs(exact)


@pytest.mark.parametrize("phi", [0.1, 1.5, 3.0, -0.1, -1.5, -3.0])
def test_branch_continuity(phi):
    v1 = fp_power_resolvent(0.4, -2, cmath.exp(1j * phi))
    v2 = fp_power_resolvent(0.4, -2, cmath.exp(1j * (phi + 1e-7)))
    assert abs(v1 - v2) <= 1e-6 * abs(v1)


def test_errors():
    with pytest.raises(ExceptionalParameter):
        fp_power_resolvent(0.3, -2, -1.0)
    with pytest.raises(ExceptionalParameter):
        fp_power_resolvent(1.0, -2, 1.0)  # Gamma(-1 - nu + 1) pole
    with pytest.raises(ValueError):
        PolyhomSymbol(lambda x: x, terms_at_zero=((1.0, 0.5, 1),))
    undeclared = PolyhomSymbol(lambda x: x**0.5, xi_lo=1e-6, xi_hi=1e6)
    with pytest.raises(TailNotIntegrable):
        fp_integral(undeclared)
