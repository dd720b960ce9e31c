import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adsdn.errors import UnresolvedXdX
from adsdn.multcalc import (
    Multiplier,
    MultiplierChain,
    RationalXi,
    ScalarFactor,
    XdX,
    XPower,
    _push_rule,
    commute_xdx,
    gamma_pair_chain,
    gamma_pair_eval,
    gamma_pair_numeric,
    push_x_left,
    resolvent,
)
from adsdn.scatter import dn_product

symbols = st.builds(
    lambda c, low, q, ar, ai: RationalXi(tuple(c), low, q, complex(ar, ai)),
    st.lists(st.floats(-3, 3), min_size=1, max_size=4),
    st.integers(-1, 3),
    st.integers(1, 3),
    st.floats(0.3, 3.0),
    st.floats(-1.0, 1.0),
)


@settings(max_examples=50, deadline=None)
@given(symbols, st.floats(0.3, 4.0))
def test_d_dxi_matches_finite_difference(sym, xi):
    h = 1e-6 * xi
    fd = (sym.evaluate(xi + h) - sym.evaluate(xi - h)) / (2 * h)
    exact = sym.d_dxi().evaluate(xi)
    assert abs(fd - exact) <= 1e-6 * max(1.0, abs(exact), abs(sym.evaluate(xi)) / xi)


@settings(max_examples=30, deadline=None)
@given(symbols, symbols, st.floats(0.3, 4.0))
def test_mul_and_add_pointwise(s1, s2, xi):
    s2 = RationalXi(s2.coeffs, s2.low, s2.q, s1.a)
    assert abs(s1.mul(s2).evaluate(xi) - s1.evaluate(xi) * s2.evaluate(xi)) <= 1e-10 * (1 + abs(s1.evaluate(xi) * s2.evaluate(xi)))
    assert abs(s1.add(s2).evaluate(xi) - s1.evaluate(xi) - s2.evaluate(xi)) <= 1e-10 * (1 + abs(s1.evaluate(xi)) + abs(s2.evaluate(xi)))


def test_bessel_symbol_of_resolvent():
    nu, a = 0.37, 1.3 + 0.4j
    L = RationalXi.resolvent(a).L_nu(nu)
    for xi in (0.2, 1.0, 3.5):
        expected = ((4 * nu - 4) * xi**2 + (4 * nu + 4) * a) / (xi**2 + a) ** 3
        assert abs(L.evaluate(xi) - expected) <= 1e-12 * abs(expected)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=1, max_size=3), st.integers(1, 4), st.floats(0.3, 3.0), st.floats(0.2, 3.0))
def test_resolvent_expansion_reconstructs(coeffs, q, a, xi):
    # numerator polynomial in xi^2
    full = []
    for c in coeffs:
        full += [c, 0.0]
    sym = RationalXi(tuple(full[:-1]), 0, q, a)
    exp = sym.resolvent_expansion()
    rebuilt = sum(e * (xi * xi + a) ** (-j) for j, e in exp.items())
    assert abs(rebuilt - sym.evaluate(xi)) <= 1e-10 * max(1.0, abs(sym.evaluate(xi)))


def test_push_x_left_idempotent_on_normal_chains():
    R = resolvent(1.3)
    terms, discarded = push_x_left(MultiplierChain((R, XPower(2), R)), 0.3)
    assert discarded >= 1
    for t in terms:
        again, _ = push_x_left(t, 0.3)
        assert len(again) == 1 and again[0].factors == t.factors


@pytest.mark.parametrize("lr", [(0, 0), (0, 1), (1, 0), (1, 1)])
def test_x_commutation_lowers_order(lr):
    sym = RationalXi.resolvent(1.7, 2)
    free, shifted = _push_rule(Multiplier(*lr, sym), 0.45)
    assert free.sym.order == sym.order - 1
    assert shifted.sym.order == sym.order


def test_xdx_must_be_commuted_first():
    R = resolvent(1.0)
    with pytest.raises(UnresolvedXdX):
        push_x_left(MultiplierChain((R, XdX(), R)), 0.3)


def test_scalars_fold_into_coefficient():
    R = resolvent(1.0)
    v1, _ = gamma_pair_chain(0.3, MultiplierChain((R, ScalarFactor(2.5), XPower(2), R)))
    v2, _ = gamma_pair_chain(0.3, MultiplierChain((R, XPower(2), R), 2.5))
    assert abs(v1 - v2) <= 1e-14 * abs(v2)


@pytest.mark.parametrize("nu", [0.3, 0.7 + 0.2j, 1.25])
@pytest.mark.parametrize("a", [1.0, 2.0 - 1.0j])
def test_single_resolvent_pairing_is_product_dn(nu, a):
    val, mixed = gamma_pair_chain(nu, MultiplierChain((resolvent(a),)))
    assert not mixed
    assert abs(val - 2 * nu * dn_product(nu, a)) <= 1e-12 * abs(val)


@pytest.mark.parametrize(
    "factors",
    [
        lambda R: (R, XPower(2), R),
        lambda R: (R, XPower(1), R, XPower(1), R),
        lambda R: (R, XdX(), R),
        lambda R: (R, XPower(1), XdX(), R),
        lambda R: (R, XPower(3), R),
    ],
    ids=["x2", "x-x", "xdx", "x-xdx", "x3"],
)
def test_closed_form_pairing_matches_position_space(factors):
    nu, a = 0.3, 1.4 + 0.3j
    chain = MultiplierChain(factors(resolvent(a)))
    closed, mixed = gamma_pair_chain(nu, chain)
    numeric = gamma_pair_numeric(nu, chain)
    if mixed:
        assert closed is None
    else:
        assert abs(closed - numeric) <= 1e-7 * abs(numeric)


def test_commuted_terms_have_leading_xdx_only():
    R = resolvent(1.0)
    for ch in commute_xdx(MultiplierChain((R, XdX(), XPower(1), R, XdX(), R))):
        rest = ch.factors[ch.leading_xdx :]
        assert not any(isinstance(f, XdX) for f in rest)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.1, 2.4).filter(lambda v: abs(2 * v - round(2 * v)) > 0.05), st.floats(0.5, 3.0), st.floats(1.2, 3.0), st.integers(1, 3))
def test_extra_resolvent_lowers_degree(nu, a, tau, n):
    def pair(aa, k):
        return gamma_pair_chain(nu, MultiplierChain(tuple(resolvent(aa) for _ in range(k))))[0]

    deg = lambda k: np.log(pair(a * tau * tau, k) / pair(a, k)) / (2 * np.log(tau))  # noqa: E731
    assert abs((deg(n + 1) - deg(n)) + 1) <= 1e-9


def test_pair_eval_scaling():
    nu = 0.4
    sym = RationalXi((1.0,), 2, 2, 1.5)
    ratio = gamma_pair_eval(nu, RationalXi((1.0,), 2, 2, 1.5 * 4)) / gamma_pair_eval(nu, sym)
    # xi^2 (xi^2+a)^-2 pairs to a^(nu) up to a constant
    assert abs(ratio - 4**nu) <= 1e-12
