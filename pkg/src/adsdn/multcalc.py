"""Hankel-multiplier chain calculus at the level of a single boundary mode.

A chain is a formal product of factors acting on functions of x > 0:

* ``Multiplier(l, r, sym)``: H_{nu+l} sym(xi) H_{nu+r}, with l, r in {0, 1};
  the resolvent P0^-1 is ``Multiplier(0, 0, 1/(xi^2 + a))``;
* ``XPower(k)``: multiplication by x^k;
* ``XdX``: the Euler operator x d/dx;
* ``ScalarFactor(c)``.

Normalization moves every x d/dx to the far left (where the plus trace turns
it into nu + 1/2) and then every power of x to the left of the multipliers.
What is left with no x in front pairs to a finite-part integral.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace
from typing import Sequence, Union

import numpy as np
from scipy.integrate import cumulative_simpson

from .errors import FitIllConditioned, UnresolvedXdX
from .fpint import fp_power_resolvent
from .specfun import bessel_i, bessel_k, gamma, principal_power

__all__ = [
    "RationalXi",
    "Multiplier",
    "XPower",
    "XdX",
    "ScalarFactor",
    "MultiplierChain",
    "resolvent",
    "apply_xi_ops",
    "commute_xdx",
    "push_x_left",
    "gamma_pair_eval",
    "gamma_pair_chain",
    "gamma_pair_numeric",
    "pair_constant",
]


# ---------------------------------------------------------------------------
# Rational symbols  sum_k c_k xi^k / (xi^2 + a)^q   (Laurent numerator)


@dataclass(frozen=True)
class RationalXi:
    coeffs: tuple
    low: int
    q: int
    a: complex

    def __post_init__(self):
        c = [complex(v) for v in self.coeffs]
        low = self.low
        while c and c[0] == 0:
            c.pop(0)
            low += 1
        while c and c[-1] == 0:
            c.pop()
        if not c:
            low = 0
        object.__setattr__(self, "coeffs", tuple(c))
        object.__setattr__(self, "low", low)
        object.__setattr__(self, "a", complex(self.a))
        if self.q < 0:
            raise ValueError("resolvent power must be non-negative")

    @classmethod
    def resolvent(cls, a, q: int = 1) -> "RationalXi":
        return cls((1.0,), 0, q, a)

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def high(self) -> int:
        return self.low + len(self.coeffs) - 1

    @property
    def order(self) -> int:
        """Homogeneity degree at infinity: numerator degree minus 2q."""
        return self.high - 2 * self.q

    def evaluate(self, xi):
        xi = np.asarray(xi, dtype=complex)
        num = np.zeros_like(xi)
        for k, c in enumerate(self.coeffs):
            num = num + c * xi ** (self.low + k)
        return num / (xi * xi + self.a) ** self.q

    def _poly(self):
        # numerator as ascending array starting at power `low`
        return np.array(self.coeffs, dtype=complex)

    def scale(self, c) -> "RationalXi":
        return replace(self, coeffs=tuple(complex(c) * v for v in self.coeffs))

    def times_xi(self, k: int) -> "RationalXi":
        return replace(self, low=self.low + k)

    def _raise_q(self, dq: int) -> "RationalXi":
        """Same function with denominator power q + dq."""
        p = self._poly()
        for _ in range(dq):
            # multiply numerator by (xi^2 + a)
            out = np.zeros(len(p) + 2, dtype=complex)
            out[: len(p)] += self.a * p
            out[2:] += p
            p = out
        return RationalXi(tuple(p), self.low, self.q + dq, self.a)

    def add(self, other: "RationalXi") -> "RationalXi":
        if other.a != self.a:
            raise ValueError("symbols with different resolvent parameters")
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        q = max(self.q, other.q)
        s, o = self._raise_q(q - self.q), other._raise_q(q - other.q)
        low = min(s.low, o.low)
        high = max(s.high, o.high)
        acc = np.zeros(high - low + 1, dtype=complex)
        acc[s.low - low : s.low - low + len(s.coeffs)] += s._poly()
        acc[o.low - low : o.low - low + len(o.coeffs)] += o._poly()
        return RationalXi(tuple(acc), low, q, self.a)

    def mul(self, other: "RationalXi") -> "RationalXi":
        if other.a != self.a:
            raise ValueError("symbols with different resolvent parameters")
        if self.is_zero or other.is_zero:
            return RationalXi((), 0, 0, self.a)
        return RationalXi(tuple(np.convolve(self._poly(), other._poly())), self.low + other.low, self.q + other.q, self.a)

    def d_dxi(self) -> "RationalXi":
        if self.is_zero:
            return self
        p = self._poly()
        powers = np.arange(self.low, self.high + 1)
        # N'(xi): coefficients shift down by one power
        dnum = p * powers  # at powers low-1 .. high-1
        # N'(xi^2+a) - 2 q xi N
        hi = self.high + 1
        lo = self.low - 1
        acc = np.zeros(hi - lo + 1, dtype=complex)
        for j, c in enumerate(dnum):
            pw = self.low - 1 + j
            acc[pw - lo] += self.a * c
            acc[pw + 2 - lo] += c
        for j, c in enumerate(p):
            pw = self.low + j + 1
            acc[pw - lo] += -2 * self.q * c
        return RationalXi(tuple(acc), lo, self.q + 1, self.a)

    def inv_xi(self) -> "RationalXi":
        return self.times_xi(-1)

    def L_nu(self, nu) -> "RationalXi":
        """-(d/dxi + (2nu+1)/xi) d/dxi."""
        d = self.d_dxi()
        return d.d_dxi().add(d.inv_xi().scale(2 * complex(nu) + 1)).scale(-1)

    def resolvent_expansion(self):
        """Coefficients e_j with sym = sum_j e_j (xi^2+a)^(-j), if the numerator
        is a polynomial in xi^2.  Returns a dict j -> e_j (j may be <= 0)."""
        if self.low < 0 or any(c != 0 for k, c in enumerate(self.coeffs) if (self.low + k) % 2):
            raise ValueError("numerator is not a polynomial in xi^2")
        out: dict[int, complex] = {}
        for k, c in enumerate(self.coeffs):
            pw = self.low + k
            if pw % 2 or c == 0:
                continue
            n = pw // 2
            # xi^(2n) = ((xi^2+a) - a)^n
            for i in range(n + 1):
                j = self.q - i
                out[j] = out.get(j, 0) + c * math.comb(n, i) * (-self.a) ** (n - i)
        return {j: v for j, v in out.items() if abs(v) > 0}

    def to_dict(self) -> dict:
        return {
            "coeffs": [[c.real, c.imag] for c in self.coeffs],
            "low": self.low,
            "q": self.q,
            "a": [self.a.real, self.a.imag],
        }


def apply_xi_ops(sym: RationalXi, op: str, nu=None) -> RationalXi:
    """Apply d/dxi, 1/xi or L_nu = -(d/dxi + (2nu+1)/xi) d/dxi exactly."""
    if op == "d_dxi":
        return sym.d_dxi()
    if op == "inv_xi":
        return sym.inv_xi()
    if op == "L_nu":
        if nu is None:
            raise ValueError("L_nu needs nu")
        return sym.L_nu(nu)
    raise ValueError(f"unknown op {op}")


# ---------------------------------------------------------------------------
# Chains


@dataclass(frozen=True)
class Multiplier:
    left: int
    right: int
    sym: RationalXi

    def is_resolvent(self) -> bool:
        s = self.sym
        return self.left == 0 and self.right == 0 and s.q == 1 and s.low == 0 and s.coeffs == (1.0,)


@dataclass(frozen=True)
class XPower:
    k: int


@dataclass(frozen=True)
class XdX:
    pass


@dataclass(frozen=True)
class ScalarFactor:
    c: complex


Factor = Union[Multiplier, XPower, XdX, ScalarFactor]


def resolvent(a) -> Multiplier:
    return Multiplier(0, 0, RationalXi.resolvent(a))


@dataclass(frozen=True)
class MultiplierChain:
    factors: tuple
    coeff: complex = 1.0
    normal: bool = False

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        object.__setattr__(self, "coeff", complex(self.coeff))

    def with_factors(self, factors, coeff=None, normal=False) -> "MultiplierChain":
        return MultiplierChain(tuple(factors), self.coeff if coeff is None else coeff, normal)

    @property
    def leading_xdx(self) -> int:
        n = 0
        for f in self.factors:
            if isinstance(f, XdX):
                n += 1
            else:
                break
        return n

    @property
    def left_x(self) -> int:
        """Power of x standing to the left of every multiplier (after XdX)."""
        rest = self.factors[self.leading_xdx :]
        return rest[0].k if rest and isinstance(rest[0], XPower) else 0

    @property
    def multipliers(self) -> list:
        return [f for f in self.factors if isinstance(f, Multiplier)]

    @property
    def is_mixed(self) -> bool:
        ms = self.multipliers
        if any(m.left != 0 for m in ms[:1]) or any(m.right != 0 for m in ms[-1:]):
            return True
        return any(m1.right != m2.left for m1, m2 in zip(ms, ms[1:]))

    def to_dict(self) -> dict:
        out = []
        for f in self.factors:
            if isinstance(f, Multiplier):
                out.append({"type": "multiplier", "left": f.left, "right": f.right, "sym": f.sym.to_dict()})
            elif isinstance(f, XPower):
                out.append({"type": "xpower", "k": f.k})
            elif isinstance(f, XdX):
                out.append({"type": "xdx"})
            else:
                out.append({"type": "scalar", "c": [complex(f.c).real, complex(f.c).imag]})
        return {"coeff": [self.coeff.real, self.coeff.imag], "normal": self.normal, "factors": out}


def _fold_scalars(chain: MultiplierChain) -> MultiplierChain:
    c = chain.coeff
    fs = []
    for f in chain.factors:
        if isinstance(f, ScalarFactor):
            c *= complex(f.c)
        elif isinstance(f, XPower) and f.k == 0:
            continue
        else:
            fs.append(f)
    # merge adjacent x powers
    merged = []
    for f in fs:
        if merged and isinstance(f, XPower) and isinstance(merged[-1], XPower):
            merged[-1] = XPower(merged[-1].k + f.k)
        else:
            merged.append(f)
    return chain.with_factors(merged, c)


def commute_xdx(chain: MultiplierChain) -> list:
    """Move every x d/dx to the far left.

    Rules: x^k (x d/dx) = (x d/dx - k) x^k and, for a multiplier with symbol b,
    M_b (x d/dx) = (x d/dx) M_b + M_{xi b'}.  For the plain resolvent this is
    P0^-1 x d/dx = (x d/dx - 2) P0^-1 + 2a P0^-2.
    """
    done, work = [], [_fold_scalars(chain)]
    while work:
        ch = work.pop()
        fs = list(ch.factors)
        idx = None
        for i in range(1, len(fs)):
            if isinstance(fs[i], XdX) and not isinstance(fs[i - 1], XdX):
                idx = i
                break
        if idx is None:
            done.append(ch)
            continue
        left = fs[idx - 1]
        head, tail = fs[: idx - 1], fs[idx + 1 :]
        if isinstance(left, XPower):
            work.append(ch.with_factors(head + [XdX(), left] + tail))
            work.append(ch.with_factors(head + [left] + tail, ch.coeff * -left.k))
        elif isinstance(left, Multiplier):
            work.append(ch.with_factors(head + [XdX(), left] + tail))
            if left.is_resolvent():
                a = left.sym.a
                work.append(ch.with_factors(head + [left] + tail, ch.coeff * -2))
                work.append(ch.with_factors(head + [left, left] + tail, ch.coeff * 2 * a))
            else:
                xb = left.sym.d_dxi().times_xi(1)
                if not xb.is_zero:
                    work.append(ch.with_factors(head + [Multiplier(left.left, left.right, xb)] + tail))
        else:
            raise TypeError(f"unexpected factor {left!r}")
    return done


def _push_rule(m: Multiplier, nu):
    """M o x = (x-free multiplier) + x o (multiplier); returns both parts."""
    b = m.sym
    db = b.d_dxi()
    two = 2 * complex(nu) + 1
    if (m.left, m.right) == (0, 0):
        return Multiplier(0, 1, db.scale(-1)), Multiplier(1, 1, b)
    if (m.left, m.right) == (0, 1):
        return Multiplier(0, 0, db.add(b.inv_xi().scale(two))), Multiplier(1, 0, b.scale(-1))
    if (m.left, m.right) == (1, 0):
        return Multiplier(1, 1, b.inv_xi().scale(two).add(db.scale(-1))), Multiplier(0, 1, b.scale(-1))
    return Multiplier(1, 0, db), Multiplier(0, 0, b)


def _merge_multipliers(chain: MultiplierChain) -> MultiplierChain:
    out = []
    for f in chain.factors:
        if out and isinstance(f, Multiplier) and isinstance(out[-1], Multiplier) and out[-1].right == f.left:
            prev = out[-1]
            out[-1] = Multiplier(prev.left, f.right, prev.sym.mul(f.sym))
        else:
            out.append(f)
    return chain.with_factors(out, normal=chain.normal)


def push_x_left(chain: MultiplierChain, nu):
    """Move all powers of x to the left of the multipliers.

    Returns ``(terms, discarded)`` where ``terms`` are chains in normal form
    and ``discarded`` counts the terms with x standing on the left (these
    vanish under the plus-trace pairing but are kept in the output).
    """
    chain = _fold_scalars(chain)
    n_lead = chain.leading_xdx
    if any(isinstance(f, XdX) for f in chain.factors[n_lead:]):
        raise UnresolvedXdX("run commute_xdx before push_x_left")
    done, work = [], [chain]
    while work:
        ch = _fold_scalars(work.pop())
        fs = list(ch.factors)
        idx = None
        for i in range(n_lead + 1, len(fs)):
            if isinstance(fs[i], XPower) and isinstance(fs[i - 1], Multiplier):
                idx = i
                break
        if idx is None:
            done.append(_merge_multipliers(ch.with_factors(fs, normal=True)))
            continue
        m, xp = fs[idx - 1], fs[idx]
        rest = [XPower(xp.k - 1)] if xp.k > 1 else []
        free, shifted = _push_rule(m, nu)
        head, tail = fs[: idx - 1], fs[idx + 1 :]
        if not free.sym.is_zero:
            work.append(ch.with_factors(head + [free] + rest + tail))
        work.append(ch.with_factors(head + [XPower(1), shifted] + rest + tail))
    discarded = sum(1 for c in done if c.left_x > 0)
    return done, discarded


# ---------------------------------------------------------------------------
# Pairings


def pair_constant(nu) -> complex:
    """2^(-2nu+2) / Gamma(nu)^2, the constant relating the trace pairing to
    the finite-part integral of xi^(2nu+1) times the symbol."""
    nu = complex(nu)
    return 2.0 ** (-2 * nu + 2) / complex(gamma(nu)) ** 2


def gamma_pair_eval(nu, sym: RationalXi) -> complex:
    """Closed-form pairing of a pure order-(nu, nu) multiplier with symbol sym.

    Every numerator monomial xi^k (xi^2+a)^-q is routed through
    ``fp_power_resolvent`` with the shifted exponent nu + k/2.
    """
    nu = complex(nu)
    total = 0j
    for k, c in enumerate(sym.coeffs):
        pw = sym.low + k
        total += c * fp_power_resolvent(nu + pw / 2, -2 * sym.q, sym.a)
    return pair_constant(nu) * total


def gamma_pair_chain(nu, chain: MultiplierChain):
    """Closed-form pairing of a raw chain that starts and ends with
    order-nu multipliers.

    Returns ``(value, mixed)``; when some x-free term keeps a mixed-order
    junction the value is ``None`` and ``mixed`` is True.
    """
    nu = complex(nu)
    total = 0j
    for ch in commute_xdx(chain):
        n_lead = ch.leading_xdx
        pref = (nu + 0.5) ** n_lead
        terms, _ = push_x_left(ch, nu)
        for t in terms:
            if t.left_x > 0:
                continue
            ms = t.multipliers
            if len(ms) != 1 or t.is_mixed:
                return None, True
            total += pref * t.coeff * gamma_pair_eval(nu, ms[0].sym)
    return total, False


# ---------------------------------------------------------------------------
# Position-space numeric pairing


class _Field:
    """Samples of a function on a log grid with first/second x-derivatives."""

    __slots__ = ("v", "d1", "d2")

    def __init__(self, v, d1, d2):
        self.v, self.d1, self.d2 = v, d1, d2


@dataclass
class _Grid:
    nu: complex
    a: complex
    x: np.ndarray
    t: np.ndarray
    psi_d: np.ndarray
    psi_d1: np.ndarray
    psi_r: np.ndarray
    psi_r1: np.ndarray


def _make_grid(nu, a, n=6001, lo=1e-6, hi=45.0) -> _Grid:
    b = cmath.sqrt(a)
    t = np.linspace(math.log(lo / abs(b)), math.log(hi / b.real), n)
    x = np.exp(t)
    z = b * x
    k0, km, kp = bessel_k(nu, z), bessel_k(nu - 1, z), bessel_k(nu + 1, z)
    i0, im, ip = bessel_i(nu, z), bessel_i(nu - 1, z), bessel_i(nu + 1, z)
    sx = np.sqrt(x)
    # normalised so the leading coefficients of x^(1/2 -+ nu) are one
    cd = 2 * principal_power(b / 2, nu) / complex(gamma(nu))
    cr = complex(gamma(1 + nu)) * principal_power(b / 2, -nu)
    psi_d = cd * sx * k0
    psi_d1 = cd * (k0 / (2 * sx) - sx * b * (km + kp) / 2)
    psi_r = cr * sx * i0
    psi_r1 = cr * (i0 / (2 * sx) + sx * b * (im + ip) / 2)
    return _Grid(complex(nu), complex(a), x, t, psi_d, psi_d1, psi_r, psi_r1)


def _csimpson(y, t):
    # cumulative_simpson discards imaginary parts, so split them
    return cumulative_simpson(y.real, x=t, initial=0) + 1j * cumulative_simpson(y.imag, x=t, initial=0)


def _cum_left(g, x, t):
    """int_{x_0}^{x_i} g dx on the log grid."""
    return _csimpson(g * x, t)


def _cum_right(g, x, t):
    """int_{x_i}^{x_end} g dx, accumulated from the right end."""
    rev = _csimpson((g * x)[::-1], -t[::-1])
    return rev[::-1]


def _apply_resolvent(G: _Grid, f: _Field) -> _Field:
    nu, a, x = G.nu, G.a, G.x
    A = _cum_left(G.psi_r * f.v, x, G.t)
    B = _cum_right(G.psi_d * f.v, x, G.t)
    v = (G.psi_d * A + G.psi_r * B) / (2 * nu)
    d1 = (G.psi_d1 * A + G.psi_r1 * B) / (2 * nu)
    d2 = ((nu * nu - 0.25) / x**2 + a) * v - f.v
    return _Field(v, d1, d2)


def _apply_factor(G: _Grid, f: _Field, fac) -> _Field:
    x = G.x
    if isinstance(fac, ScalarFactor):
        c = complex(fac.c)
        return _Field(c * f.v, c * f.d1, c * f.d2)
    if isinstance(fac, XPower):
        k = fac.k
        xk = x**k
        v = xk * f.v
        d1 = k * x ** (k - 1) * f.v + xk * f.d1
        d2 = k * (k - 1) * x ** (k - 2) * f.v + 2 * k * x ** (k - 1) * f.d1 + xk * f.d2
        return _Field(v, d1, d2)
    if isinstance(fac, XdX):
        v = x * f.d1
        d1 = f.d1 + x * f.d2
        d3 = np.gradient(f.d2, G.t, edge_order=2) / x
        d2 = 2 * f.d2 + x * d3
        return _Field(v, d1, d2)
    if isinstance(fac, Multiplier):
        if fac.left or fac.right:
            raise ValueError("position-space pairing handles order-(nu, nu) multipliers only")
        if fac.sym.a != G.a:
            raise ValueError("resolvent parameter mismatch")
        out = _Field(np.zeros_like(f.v), np.zeros_like(f.v), np.zeros_like(f.v))
        for j, e in fac.sym.resolvent_expansion().items():
            if j <= 0:
                raise ValueError("position-space pairing needs symbols decaying like resolvent powers")
            g = f
            for _ in range(j):
                g = _apply_resolvent(G, g)
            out = _Field(out.v + e * g.v, out.d1 + e * g.d1, out.d2 + e * g.d2)
        return out
    raise TypeError(f"unexpected factor {fac!r}")


def _exponent_family(bases, jmax, skip=None):
    """bases + j, j = 0..jmax, without near-duplicates (and without ``skip``)."""
    es = []
    for j in range(jmax + 1):
        for base in bases:
            e = base + j
            if skip is not None and abs(e - skip) < 1e-9:
                continue
            if all(abs(e - f) > 1e-9 for f in es):
                es.append(e)
    return es


PRECISION_LIMIT = 1e-7


def _fit_coefficient(x, y, exponents, target, window):
    """Least-squares fit y ~ sum c_e x^e on x <= window; return c_target."""
    sel = x <= window
    xs, ys = x[sel] / window, y[sel]
    exps = list(exponents)
    if all(abs(e - target) > 1e-12 for e in exps):
        exps.append(target)
    A = np.stack([np.exp(e * np.log(xs)) for e in exps], axis=1)
    col = np.linalg.norm(A, axis=0)
    As = A / col
    coef, *_ = np.linalg.lstsq(As, ys, rcond=None)
    resid = np.linalg.norm(As @ coef - ys) / max(np.linalg.norm(ys), 1e-300)
    cond = np.linalg.cond(As)
    if resid > 1e-9 or cond > 1e13:
        raise FitIllConditioned(f"expansion fit residual {resid:.2e}, condition {cond:.2e}")
    idx = min(range(len(exps)), key=lambda i: abs(exps[i] - target))
    return coef[idx] / col[idx] / window ** exps[idx]


def gamma_pair_numeric(nu, chain: MultiplierChain, a=None, n: int = 6001) -> complex:
    """Plus-trace pairing of a chain computed in position space.

    The chain is applied right-to-left to the Poisson solution 2 nu psi_dec on
    a log grid (resolvents by variation of parameters, derivatives carried
    along exactly).  If the leftmost factor is a resolvent the pairing is the
    finite part of the integral of psi_dec against the rest; otherwise the
    x^(1/2+nu) coefficient of the result is extracted by an expansion fit.
    """
    nu = complex(nu)
    chain = _fold_scalars(chain)
    fs = list(chain.factors)
    if not fs or not isinstance(fs[-1], Multiplier):
        raise ValueError("chain must end with a resolvent acting on the trace adjoint")
    last = fs[-1]
    a = last.sym.a if a is None else complex(a)
    G = _make_grid(nu, a, n=n)
    x = G.x
    b = cmath.sqrt(a)
    # the rightmost multiplier acting on the trace adjoint
    # P0^-j gamma* = P0^-(j-1) (2 nu psi_dec)
    pieces = last.sym.resolvent_expansion()
    base = _Field(2 * nu * G.psi_d, 2 * nu * G.psi_d1, 2 * nu * (((nu * nu - 0.25) / x**2 + a) * G.psi_d))
    f = _Field(np.zeros_like(base.v), np.zeros_like(base.v), np.zeros_like(base.v))
    for j, e in pieces.items():
        g = base
        for _ in range(j - 1):
            g = _apply_resolvent(G, g)
        f = _Field(f.v + e * g.v, f.d1 + e * g.d1, f.d2 + e * g.d2)
    rest = fs[:-1]
    window = 1e-3 / abs(b)
    if rest and isinstance(rest[0], Multiplier) and rest[0].is_resolvent():
        for fac in reversed(rest[1:]):
            f = _apply_factor(G, f, fac)
        integrand = G.psi_d * f.v
        tail = _cum_right(integrand, x, G.t)
        # finite part at zero: fit the cumulative tail integral, whose
        # powers are those of psi_dec times the chain output, plus one
        exps = _exponent_family((2.0 - 2 * nu, 2.0, 2.0 + 2 * nu), 3, skip=0.0)
        c0 = _fit_coefficient(x, tail, exps, 0.0, window)
        # x^(2-2nu) dominates the tail near zero for large Re nu; quadrature
        # roundoff there is amplified by max|tail| / |c0|
        loss = 1e-12 * np.max(np.abs(tail[x <= window])) / max(abs(c0), 1e-300)
        if loss > PRECISION_LIMIT:
            raise FitIllConditioned(f"finite part lost to cancellation (estimated rel err {loss:.1e})")
        return chain.coeff * c0 / (2 * nu)
    for fac in reversed(rest):
        f = _apply_factor(G, f, fac)
    exps = _exponent_family((0.5 - nu, 0.5 + nu), 3)
    return chain.coeff * _fit_coefficient(x, f.v, exps, 0.5 + nu, window)
