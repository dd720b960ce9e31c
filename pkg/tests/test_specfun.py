import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adsdn.errors import ExceptionalMass, IntegerOrder, PoleAtNonPositiveInteger
from adsdn.specfun import (
    OrderParam,
    bessel_i,
    bessel_j,
    bessel_k,
    gamma,
    hankel_kernel,
    log_gamma,
    principal_power,
    rgamma,
)

re_order = st.floats(0.05, 3.0)
im_order = st.floats(-1.0, 1.0)


@pytest.mark.parametrize("x", [0.1, 0.5, 1.0, 2.5, 7.3, 20.0, 150.0])
def test_gamma_real_matches_math(x):
    assert abs(gamma(x) - math.gamma(x)) <= 1e-13 * math.gamma(x)


@settings(max_examples=60, deadline=None)
@given(st.floats(-6.5, 8.0), st.floats(-6.0, 6.0))
def test_gamma_complex_matches_mpmath(x, y):
    z = complex(x, y)
    if abs(y) < 1e-3 and round(x) <= 0 and abs(x - round(x)) < 1e-3:
        return
    ref = complex(mpmath.gamma(mpmath.mpc(x, y)))
    assert abs(complex(gamma(z)) - ref) <= 1e-12 * abs(ref)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 40.0), st.floats(-40.0, 40.0))
def test_log_gamma_exponentiates_to_gamma(x, y):
    z = complex(x, y)
    ref = complex(mpmath.loggamma(mpmath.mpc(x, y)))
    # equal modulo 2 pi i
    d = complex(log_gamma(z)) - ref
    assert abs(d.real) <= 1e-11 * max(1.0, abs(ref))
    assert abs((d.imag / (2 * math.pi)) - round(d.imag / (2 * math.pi))) <= 1e-11 * max(1.0, abs(ref))


@pytest.mark.parametrize("n", [0, -1, -2, -7])
def test_gamma_poles(n):
    with pytest.raises(PoleAtNonPositiveInteger):
        gamma(n)
    assert rgamma(n) == 0


@settings(max_examples=40, deadline=None)
@given(re_order, im_order, st.floats(0.05, 40.0))
def test_bessel_j_matches_mpmath(a, b, x):
    nu = complex(a, b)
    ref = complex(mpmath.besselj(mpmath.mpc(a, b), x))
    scale = max(abs(ref), abs(complex(mpmath.besselj(mpmath.mpc(a, b) + 1, x))), 1e-6)
    assert abs(complex(bessel_j(nu, x)) - ref) <= 1e-10 * scale


@settings(max_examples=40, deadline=None)
@given(re_order, im_order, st.floats(0.1, 30.0))
def test_bessel_recurrence_property(a, b, x):
    nu = complex(a, b)
    lhs = bessel_j(nu - 1, x) + bessel_j(nu + 1, x)
    rhs = 2 * nu / x * bessel_j(nu, x)
    scale = max(abs(rhs), abs(bessel_j(nu, x)), abs(bessel_j(nu + 1, x)), 1e-6)
    assert abs(lhs - rhs) <= 1e-9 * scale


@settings(max_examples=30, deadline=None)
@given(re_order, im_order, st.floats(0.1, 20.0))
def test_bessel_j_conjugation(a, b, x):
    nu = complex(a, b)
    assert abs(bessel_j(nu.conjugate(), x) - np.conj(bessel_j(nu, x))) <= 1e-14 * max(1, abs(bessel_j(nu, x)))


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 2.9).filter(lambda v: abs(v - round(v)) > 1e-3), st.floats(-0.5, 0.5), st.floats(0.05, 8.0), st.floats(-1.2, 1.2))
def test_bessel_k_matches_mpmath(a, b, r, phi):
    nu = complex(a, b)
    z = r * cmath.exp(1j * phi)
    ref = complex(mpmath.besselk(mpmath.mpc(a, b), mpmath.mpc(z.real, z.imag)))
    assert abs(complex(bessel_k(nu, z)) - ref) <= 1e-9 * abs(ref)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 2.9), st.floats(-0.5, 0.5), st.floats(0.05, 6.0), st.floats(-1.2, 1.2))
def test_bessel_i_matches_mpmath(a, b, r, phi):
    nu = complex(a, b)
    z = r * cmath.exp(1j * phi)
    ref = complex(mpmath.besseli(mpmath.mpc(a, b), mpmath.mpc(z.real, z.imag)))
    assert abs(complex(bessel_i(nu, z)) - ref) <= 1e-10 * abs(ref)


def test_bessel_vectorised_and_kernel():
    x = np.linspace(0.1, 10, 7)
    v = bessel_j(0.3, x)
    assert v.shape == x.shape
    assert np.allclose(hankel_kernel(0.3, x), np.sqrt(x) * v, rtol=1e-14, atol=0)


def test_bessel_k_rejects_integer_order():
    with pytest.raises(IntegerOrder):
        bessel_k(1.0, 2.0)


def test_principal_power_branch():
    assert abs(principal_power(-1 + 1e-12j, 0.5) - 1j) < 1e-10
    assert abs(principal_power(-1 - 1e-12j, 0.5) + 1j) < 1e-10
    with pytest.raises(ValueError):
        principal_power(0, 0.3)


def test_order_param_flags():
    assert OrderParam(0.5).is_half_integer
    assert OrderParam(2.0).is_integer and OrderParam(2.0).is_half_integer
    assert not OrderParam(0.3 + 0.1j).is_real
    with pytest.raises(ExceptionalMass):
        OrderParam(1.5).require_admissible()
    with pytest.raises(ExceptionalMass):
        OrderParam(-0.2)
