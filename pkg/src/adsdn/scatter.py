"""Dirichlet-to-Neumann engine per boundary mode.

Conventions: lambda = G/F, the ratio of the x^(1/2+nu) coefficient to the
x^(1/2-nu) coefficient of the recessive solution.  Powers of the mode symbol
use the principal branch, with the retarded i*eps applied beforehand.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ExceptionalParameter, PoleTooClose, VanishingTransfer
from .fpint import fp_integral, fp_power_resolvent, power_resolvent_symbol
from .model import ModeModel, check_mass, check_symbol
from .multcalc import MultiplierChain, XdX, XPower, gamma_pair_chain, gamma_pair_numeric, resolvent
from .specfun import gamma, principal_power

__all__ = [
    "dn_constant",
    "dn_product",
    "complex_power",
    "mode_symbol",
    "conformal_residue",
    "dn_expansion",
    "dn_transfer",
    "DNExpansion",
    "DNRow",
    "DNTable",
    "METHODS",
]

MAX_DEPTH = 8

METHODS = ("closed_form", "ode_oracle", "pde_extraction") + tuple(f"expansion_order_{j}" for j in range(MAX_DEPTH + 1))


def dn_constant(nu) -> complex:
    """2^(-2nu) Gamma(-nu)/Gamma(nu): the DN value at a = 1."""
    nu = complex(nu)
    val = 2.0 ** (-2 * nu) * complex(gamma(-nu)) / complex(gamma(nu))
    return val


def boundary_constant(nu) -> complex:
    """-2^(-2nu+1) Gamma(1-nu)/Gamma(nu), the constant under the weighted
    Neumann trace u_+ = (x^(-2nu) x d_x x^(nu-1/2) u)|_0."""
    nu = complex(nu)
    return -(2.0 ** (-2 * nu + 1)) * complex(gamma(1 - nu)) / complex(gamma(nu))


def dn_product(nu, a) -> complex:
    """Closed-form DN value of the product model: 2^(-2nu) Gamma(-nu)/Gamma(nu) a^nu."""
    nu = check_mass(nu)
    a = check_symbol(a)
    return dn_constant(nu) * principal_power(a, nu)


def complex_power(nu, a) -> complex:
    """a^nu from the finite-part resolvent integral, evaluated numerically.

    a^nu = 2 / (Gamma(1+nu) Gamma(-nu)) * fp-int xi^(2nu+1) (a + xi^2)^-1 dxi.
    """
    nu = check_mass(nu)
    a = check_symbol(a)
    fp = fp_integral(power_resolvent_symbol(nu, -2, a))
    return 2.0 / (complex(gamma(1 + nu)) * complex(gamma(-nu))) * fp


def mode_symbol(tau: float, eta, epsilon: float = 1e-3) -> complex:
    """Retarded mode value |eta|^2 - (tau - i eps)^2 of the boundary wave operator."""
    eta2 = float(np.sum(np.square(np.atleast_1d(np.asarray(eta, dtype=float)))))
    if tau == 0 and eta2 == 0:
        raise ExceptionalParameter("(tau, eta) = 0 is excluded")
    return eta2 - (tau - 1j * epsilon) ** 2


def conformal_residue(k: int, a, delta: float = 1e-3) -> complex:
    """(-1)^(k+1) 2^(2k) k! (k-1)! lim_{nu->k} (nu-k) Lambda(nu).

    The limit is taken from symmetric samples at k +- delta and k +- delta/2
    combined by one Richardson step.
    """
    if k < 1 or int(k) != k:
        raise ValueError("k must be a positive integer")
    if not (1e-6 <= delta <= 1e-2):
        raise PoleTooClose(f"delta={delta} outside [1e-6, 1e-2]")
    if 2 * delta >= 0.5:
        raise PoleTooClose("sampling window reaches a neighbouring half-integer")
    a = check_symbol(a)

    def g(nu):
        return (nu - k) * dn_product(nu, a)

    def sym(h):
        return 0.5 * (g(k + h) + g(k - h))

    limit = (4 * sym(delta / 2) - sym(delta)) / 3
    const = (-1) ** (k + 1) * 4.0**k * math.factorial(k) * math.factorial(k - 1)
    return const * limit


@dataclass(frozen=True)
class DNRow:
    tau: float
    eta: float
    lam: complex
    method: str
    err: float

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method tag {self.method}")


@dataclass
class DNTable:
    rows: list = field(default_factory=list)

    def add(self, row: DNRow):
        self.rows.append(row)

    def __len__(self):
        return len(self.rows)

    def by_method(self, method: str):
        return [r for r in self.rows if r.method == method]


# ---------------------------------------------------------------------------
# Parametrix recursion


@dataclass(frozen=True)
class DNExpansion:
    """Orders Lambda_0..Lambda_J of the DN expansion.

    ``mixed_order_numeric_only[j]`` is True when some chain of order j had a
    mixed-order normal form and was evaluated only by the numeric pairing.
    """

    values: tuple
    mixed_order_numeric_only: tuple
    chain_counts: tuple

    def __len__(self):
        return len(self.values)

    def __getitem__(self, j):
        return self.values[j]

    def __iter__(self):
        return iter(self.values)

    def partial_sum(self, J: int | None = None) -> complex:
        J = len(self.values) - 1 if J is None else J
        return complex(sum(self.values[: J + 1]))


def _p_terms(model: ModeModel, k: int):
    """Mode-level pieces of P_k = x^(k-1) c_(k-1) (x d_x + (d-1)/2) + x^k a_k."""
    h = (model.d - 1) / 2.0
    pre = (XPower(k - 1),) if k > 1 else ()
    out = []
    c = model.c_taylor[k - 1] if k - 1 < len(model.c_taylor) else 0
    if c != 0:
        out.append((c, pre + (XdX(),)))
        if h:
            out.append((c * h, pre))
    ak = model.a_taylor[k] if k < len(model.a_taylor) else 0
    if ak != 0:
        out.append((ak, (XPower(k),)))
    return out


@lru_cache(maxsize=4096)
def _pair_unit(nu: complex, factors: tuple):
    chain = MultiplierChain(factors, 1.0)
    val, mixed = gamma_pair_chain(nu, chain)
    if mixed:
        return gamma_pair_numeric(nu, chain), True
    return val, False


def _pair(nu, chain: MultiplierChain):
    val, mixed = _pair_unit(complex(nu), tuple(chain.factors))
    return chain.coeff * val, mixed


def dn_expansion(model: ModeModel, J: int = 2) -> DNExpansion:
    """Lambda_j = (2nu)^-1 gamma_+ Q_-j gamma_+^*, j = 0..J.

    Q_0 = P0^-1 and Q_-l = -sum_{k=1..l} Q_(-l+k) P_k P0^-1 with the model
    frozen at its boundary Taylor data.  Chains that reduce to pure-order
    multipliers are paired in closed form; the rest numerically.
    """
    if not 0 <= J <= MAX_DEPTH:
        raise ValueError(f"expansion depth J must lie in 0..{MAX_DEPTH}")
    nu = check_mass(model.nu)
    a0 = check_symbol(model.a0)
    R = resolvent(a0)
    Q = [[(1.0 + 0j, (R,))]]
    for l in range(1, J + 1):
        acc = []
        for k in range(1, l + 1):
            for qc, qf in Q[l - k]:
                for pc, pf in _p_terms(model, k):
                    acc.append((-qc * pc, qf + pf + (R,)))
        Q.append(acc)
    values, flags, counts = [], [], []
    for l, terms in enumerate(Q):
        if l == 0:
            values.append(dn_product(nu, a0))
            flags.append(False)
            counts.append(1)
            continue
        total, mixed = 0j, False
        for c, fs in terms:
            v, m = _pair(nu, MultiplierChain(fs, c))
            total += v
            mixed |= m
        values.append(total / (2 * nu))
        flags.append(mixed)
        counts.append(len(terms))
    return DNExpansion(tuple(complex(v) for v in values), tuple(flags), tuple(counts))


def transfer_scale(nu, a0, N: int) -> float:
    """Size of a generic transfer coefficient: |dn_constant| |a0|^(Re nu - 1 - N/2)."""
    nu = complex(nu)
    return abs(dn_constant(nu)) * abs(complex(a0)) ** (nu.real - 1 - N / 2)


def dn_transfer(nu, d: int, a0, N: int, kind: str = "metric", check: bool = True) -> complex:
    """Linear response of Lambda to a_N (``metric``) or c_(N-1) (``conformal_factor``)
    at the product background a = a0.

    Homogeneity in the background: transfer(tau^2 a0) = tau^(2nu-2-N) transfer(a0)
    for the metric kind.
    """
    nu = check_mass(nu)
    a0 = check_symbol(a0)
    if N < 1:
        raise ValueError("N must be positive")
    R = resolvent(a0)
    pre = (XPower(N - 1),) if N > 1 else ()
    if kind == "metric":
        pieces = [(1.0, (XPower(N),))]
    elif kind == "conformal_factor":
        h = (d - 1) / 2.0
        pieces = [(1.0, pre + (XdX(),))] + ([(h, pre)] if h else [])
    else:
        raise ValueError("kind must be 'metric' or 'conformal_factor'")
    total = 0j
    for c, fs in pieces:
        v, _ = _pair(nu, MultiplierChain((R,) + fs + (R,), c))
        total += v
    out = -total / (2 * nu)
    if check and abs(out) < 1e-10 * transfer_scale(nu, a0, N):
        raise VanishingTransfer(f"transfer for N={N} vanishes at nu={nu} (|T|={abs(out):.3e})")
    return complex(out)
