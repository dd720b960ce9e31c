"""Hadamard finite-part integrals over (0, inf).

A symbol is described by its leading power terms at 0 and at infinity plus a
callable core.  The finite part is the sum of the regularized monomial
integrals of the declared terms and an ordinary integral of what is left.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import ExceptionalParameter, TailNotIntegrable
from .specfun import gamma, principal_power, rgamma

__all__ = [
    "PolyhomSymbol",
    "fp_monomial",
    "fp_integral",
    "fp_power_resolvent",
    "power_resolvent_symbol",
]

_INTERVALS = ("unit_to_inf", "zero_to_unit", "full")


def _is_minus_one(beta) -> bool:
    return abs(complex(beta) + 1.0) < 1e-14


def fp_monomial(beta, interval: str) -> complex:
    """Regularized integral of xi**beta over (1,inf), (0,1) or (0,inf)."""
    if interval not in _INTERVALS:
        raise ValueError(f"interval must be one of {_INTERVALS}")
    if _is_minus_one(beta) or interval == "full":
        return 0.0
    val = 1.0 / (1.0 + complex(beta))
    if val.imag == 0.0:
        val = val.real
    return -val if interval == "unit_to_inf" else val


@dataclass(frozen=True)
class PolyhomSymbol:
    """Power-law expansions at both ends plus a numerically evaluable core.

    Terms are ``(coeff, beta)`` pairs meaning ``coeff * xi**beta``.  A third
    entry (log power) is rejected: log-homogeneous terms are not supported.
    """

    core: Callable[[np.ndarray], np.ndarray]
    terms_at_zero: Sequence[tuple] = field(default_factory=tuple)
    terms_at_infinity: Sequence[tuple] = field(default_factory=tuple)
    xi_lo: float = 1e-8
    xi_hi: float = 1e8
    split: float = 1.0
    # optional exact remainders (core minus declared terms), used instead of
    # the subtraction when the producer can avoid the cancellation
    remainder_zero: Callable[[np.ndarray], np.ndarray] | None = None
    remainder_infinity: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        for t in tuple(self.terms_at_zero) + tuple(self.terms_at_infinity):
            if len(t) != 2:
                raise ValueError("log-homogeneous terms (xi^b log^k xi) are not supported")
        if not (0 < self.xi_lo < self.split < self.xi_hi):
            raise ValueError("need 0 < xi_lo < split < xi_hi")


def _terms(terms, xi):
    acc = np.zeros_like(xi, dtype=complex)
    for c, b in terms:
        acc = acc + complex(c) * np.exp(complex(b) * np.log(xi))
    return acc


def _remainder_integral(fun, t0, t1, rtol):
    """Integrate fun(e^t) e^t over [t0, t1] with adaptive Gauss-Kronrod."""

    def g(t):
        x = math.exp(t)
        return complex(fun(np.array([x]))[0]) * x

    val, err = integrate.quad(g, t0, t1, epsabs=0.0, epsrel=rtol, limit=400, complex_func=True)
    return val, err


def _fp_monomial_split(beta, s, side):
    """fp-int of xi**beta over (0, s) (side=0) or (s, inf) (side=1)."""
    if _is_minus_one(beta):
        val = math.log(s)
    else:
        beta = complex(beta)
        val = complex(np.exp((1 + beta) * math.log(s))) / (1 + beta)
    return -val if side else val


def fp_integral(sym: PolyhomSymbol, rtol: float = 1e-10) -> complex:
    """Finite-part integral of a polyhomogeneous symbol over (0, inf).

    The line is split at ``sym.split``; with the default split at 1 the
    declared terms contribute exactly ``fp_monomial`` values.
    """
    s = sym.split
    zero_sum = sum(complex(c) * _fp_monomial_split(b, s, 0) for c, b in sym.terms_at_zero)
    inf_sum = sum(complex(c) * _fp_monomial_split(b, s, 1) for c, b in sym.terms_at_infinity)

    def r0(xi):
        if sym.remainder_zero is not None:
            return np.asarray(sym.remainder_zero(xi), dtype=complex)
        return np.asarray(sym.core(xi), dtype=complex) - _terms(sym.terms_at_zero, xi)

    def r1(xi):
        if sym.remainder_infinity is not None:
            return np.asarray(sym.remainder_infinity(xi), dtype=complex)
        return np.asarray(sym.core(xi), dtype=complex) - _terms(sym.terms_at_infinity, xi)

    # the remainders must be negligible at the truncation points
    scale = max(abs(complex(sym.core(np.array([s]))[0])) * s, 1e-300)
    for fun, xi in ((r0, sym.xi_lo), (r1, sym.xi_hi)):
        tail = abs(complex(fun(np.array([xi]))[0])) * xi
        if not np.isfinite(tail) or tail > 1e-9 * scale:
            raise TailNotIntegrable(f"remainder at xi={xi:g} is {tail:.3e} (scale {scale:.3e})")

    v0, _ = _remainder_integral(r0, math.log(sym.xi_lo), math.log(s), rtol)
    v1, _ = _remainder_integral(r1, math.log(s), math.log(sym.xi_hi), rtol)
    out = zero_sum + inf_sum + v0 + v1
    return complex(out)


def _on_gamma_pole(z) -> bool:
    z = complex(z)
    k = round(z.real)
    return k <= 0 and abs(z - k) < 1e-12


def fp_power_resolvent(nu, m, a) -> complex:
    """Closed form of fp-int_0^inf xi^(2nu+1) (xi^2 + a)^(m/2) dxi.

    Principal branch for powers of ``a``; requires |arg a| < pi.
    """
    nu, m, a = complex(nu), complex(m), complex(a)
    if a == 0 or (a.imag == 0 and a.real < 0):
        raise ExceptionalParameter(f"resolvent parameter a={a} is on the branch cut")
    for z in (1 + nu, -1 - nu - m / 2):
        if _on_gamma_pole(z):
            raise ExceptionalParameter(f"Gamma pole at {z} for nu={nu}, m={m}")
    inv = complex(rgamma(-m / 2))
    if inv == 0:
        return 0j
    return 0.5 * principal_power(a, 1 + nu + m / 2) * complex(gamma(1 + nu)) * complex(gamma(-1 - nu - m / 2)) * inv


def power_resolvent_symbol(nu, m, a, extra_terms: int = 6, xi_lo=1e-6, xi_hi=1e6) -> PolyhomSymbol:
    """xi^(2nu+1) (xi^2+a)^(m/2) with its expansion at infinity declared.

    The expansion keeps every binomial term that is not integrable at
    infinity plus ``extra_terms`` more so the remainder decays quickly.
    """
    nu, m, a = complex(nu), complex(m), complex(a)
    lead = 2 * nu + 1 + m
    terms_inf = []
    coeff = 1.0 + 0j
    extras = 0
    n_inf = 0
    for j in range(200):
        beta = lead - 2 * j
        if beta.real < -1:
            if extras >= extra_terms:
                break
            extras += 1
        terms_inf.append((coeff * a**j, beta))
        coeff = coeff * (m / 2 - j) / (j + 1)
        n_inf = j + 1
    tail_coeff0 = coeff

    def remainder_infinity(xi):
        # binomial series of (1 + a/xi^2)^(m/2) from index n_inf on
        xi = np.asarray(xi, dtype=float)
        r = a / (xi * xi)
        c = tail_coeff0
        term = c * r**n_inf
        acc = term.copy()
        for j in range(n_inf, n_inf + 400):
            term = term * (m / 2 - j) / (j + 1) * r
            acc = acc + term
            if np.all(np.abs(term) <= 1e-18 * np.abs(acc)):
                break
        return np.exp(lead * np.log(xi)) * acc
    terms_zero = []
    if (2 * nu + 1).real <= -1:
        # leading term at zero: a^(m/2) xi^(2nu+1); more are even steps
        c = principal_power(a, m / 2)
        for k in range(0, 40):
            beta = 2 * nu + 1 + 2 * k
            terms_zero.append((c, beta))
            if beta.real > -1 + 2:
                break
            c = c * (m / 2 - k) / (k + 1) / a

    def core(xi):
        xi = np.asarray(xi, dtype=float)
        base = xi * xi + a
        return np.exp((2 * nu + 1) * np.log(xi)) * np.exp((m / 2) * np.log(base))

    # split beyond |a|^(1/2) so the expansion at infinity converges there
    split = max(1.0, 2.0 * math.sqrt(abs(a)))
    return PolyhomSymbol(
        core, tuple(terms_zero), tuple(terms_inf), xi_lo, xi_hi, split,
        remainder_infinity=remainder_infinity,
    )
