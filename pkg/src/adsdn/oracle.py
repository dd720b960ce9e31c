"""Ground-truth DN values per mode from the mode ODE.

The recessive solution is seeded at the slab edge from sqrt(x) K_nu, carried
inward with an adaptive complex Runge-Kutta integrator, and matched at x_m to
the two Frobenius branches x^(1/2 -+ nu)(1 + ...).  The DN value is the ratio
G/F of the plus-branch to the minus-branch coefficient.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import MatchIllConditioned, NumericalContractError, ResonantMass, TailNotDecaying
from .model import ModeModel
from .specfun import bessel_k

__all__ = ["FrobeniusBasis", "frobenius", "ode_dn", "OdeResult", "kbessel_seed"]


@dataclass(frozen=True)
class FrobeniusBasis:
    branch: str
    s: complex
    coeffs: np.ndarray
    x_m: float
    residual: float

    def value(self, x):
        x = np.asarray(x, dtype=float)
        k = np.arange(len(self.coeffs))
        pw = np.power.outer(x, k)
        return np.exp(self.s * np.log(x)) * (pw @ self.coeffs)

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        k = np.arange(len(self.coeffs))
        pw = np.power.outer(x, k)
        return np.exp((self.s - 1) * np.log(x)) * (pw @ (self.coeffs * (self.s + k)))


def frobenius(model: ModeModel, branch: str, K: int = 24, x_m: float | None = None) -> FrobeniusBasis:
    """Series solution x^s sum_k beta_k x^k with s = 1/2 -+ nu."""
    if branch not in ("minus", "plus"):
        raise ValueError("branch must be 'minus' or 'plus'")
    nu = complex(model.nu)
    s = 0.5 - nu if branch == "minus" else 0.5 + nu
    x_m = 0.1 * model.slab_eps if x_m is None else x_m
    a, c = model.a_taylor, model.c_taylor
    h = (model.d - 1) / 2.0
    beta = np.zeros(K + 1, dtype=complex)
    beta[0] = 1.0

    def forcing(k, upto):
        acc = 0j
        for m in range(0, min(k - 2, upto) + 1):
            j = k - 2 - m
            coef = (a[j] if j < len(a) else 0) + (c[j] * (s + m + h) if j < len(c) else 0)
            acc += coef * beta[m]
        return acc

    for k in range(1, K + 1):
        den = nu * nu - 0.25 - (s + k) * (s + k - 1)
        if abs(den) < 1e-12:
            raise ResonantMass(f"Frobenius denominator vanishes at k={k} (2nu integer)")
        beta[k] = -forcing(k, k) / den if k >= 2 else 0.0

    # residual of the truncated series at x_m / 2: only orders beyond K survive
    xr = 0.5 * x_m
    deg = max(len(a), len(c)) + 2
    res = 0j
    for k in range(K + 1, K + 1 + deg):
        res += forcing(k, K) * xr ** (k - 2)
    u_scale = abs(sum(beta[k] * xr**k for k in range(K + 1)))
    residual = abs(res) * xr**2 / max(u_scale, 1e-300)
    return FrobeniusBasis(branch, s, beta, x_m, residual)


def kbessel_seed(nu, b, x):
    """(u, u') for u = sqrt(x) K_nu(b x)."""
    k0 = complex(bessel_k(nu, b * x))
    km = complex(bessel_k(nu - 1, b * x))
    kp = complex(bessel_k(nu + 1, b * x))
    u = np.sqrt(x) * k0
    du = k0 / (2 * np.sqrt(x)) - np.sqrt(x) * b * (km + kp) / 2
    return u, du


@dataclass(frozen=True)
class OdeResult:
    lam: complex
    err: float
    F: complex
    G: complex


def _integrate(model: ModeModel, x_start, x_m, rtol):
    nu = complex(model.nu)
    a_tail = model.a_tail
    b = cmath.sqrt(a_tail)
    if b.real <= 0:
        raise TailNotDecaying(f"Re sqrt(a_tail) = {b.real} <= 0")
    u0, du0 = kbessel_seed(nu, b, x_start)
    scale = abs(u0) + abs(du0)
    y0 = np.array([u0 / scale, du0 / scale], dtype=complex)
    v = nu * nu - 0.25
    h = (model.d - 1) / 2.0
    product = model.is_product

    def rhs(x, y):
        u, du = y
        if product:
            pot = v / (x * x) + a_tail
            return np.array([du, pot * u])
        pot = v / (x * x) + model.a_of(x)
        return np.array([du, pot * u + model.c_of(x) * (x * du + h * u)])

    sol = solve_ivp(rhs, (x_start, x_m), y0, method="DOP853", rtol=rtol, atol=1e-14 * rtol)
    if not sol.success:
        raise NumericalContractError(f"inward integration failed: {sol.message}")
    return sol.y[:, -1]


def _match(fm: FrobeniusBasis, fp: FrobeniusBasis, y, x_m):
    A = np.array([[fm.value(x_m), fp.value(x_m)], [fm.derivative(x_m), fp.derivative(x_m)]], dtype=complex)
    det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    size = np.abs(A).max() ** 2
    if abs(det) < 1e-13 * size:
        raise MatchIllConditioned(f"basis Wronskian {abs(det):.3e} at x_m={x_m}")
    F, G = np.linalg.solve(A, y)
    return F, G


def ode_dn(
    model: ModeModel,
    x_start: float | None = None,
    x_m: float | None = None,
    rtol: float = 1e-12,
    K: int = 24,
) -> OdeResult:
    """DN value lambda = G/F of the recessive solution of the mode ODE.

    The error estimate is the change in lambda when the integrator tolerance
    is loosened by a factor of 100.
    """
    x_start = model.slab_eps if x_start is None else x_start
    x_m = 0.1 * model.slab_eps if x_m is None else x_m
    if not (0 < x_m < x_start):
        raise ValueError("need 0 < x_m < x_start")
    fm = frobenius(model, "minus", K, x_m)
    fp = frobenius(model, "plus", K, x_m)
    if max(fm.residual, fp.residual) > 1e-8:
        raise NumericalContractError(
            f"Frobenius residual {max(fm.residual, fp.residual):.2e} at x_m={x_m}; shrink x_m"
        )
    y = _integrate(model, x_start, x_m, rtol)
    F, G = _match(fm, fp, y, x_m)
    y2 = _integrate(model, x_start, x_m, rtol * 100)
    F2, G2 = _match(fm, fp, y2, x_m)
    lam = G / F
    return OdeResult(complex(lam), float(abs(lam - G2 / F2)), complex(F), complex(G))
