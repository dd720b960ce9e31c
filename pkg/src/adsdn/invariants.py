"""Fast invariant suite run by the ``selftest`` command.

Each check returns a :class:`Check` with the measured value and the bound it
was held to.  The suite is deterministic for a given seed.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import digamma

from . import specfun, transforms
from .errors import ExceptionalParameter
from .fpint import fp_integral, fp_power_resolvent, power_resolvent_symbol
from .model import ModeModel
from .multcalc import MultiplierChain, Multiplier, RationalXi, XPower, _push_rule, gamma_pair_chain, push_x_left, resolvent
from .oracle import ode_dn
from .pde_sim import GridConfig, TwistedField, gaussian_pulse, neumann_error, run_forward
from .scatter import boundary_constant, dn_constant, dn_expansion, dn_product, dn_transfer

__all__ = ["Check", "run_suite", "CHECKS"]


@dataclass(frozen=True)
class Check:
    module: str
    name: str
    value: float
    bound: float
    passed: bool

    def to_dict(self):
        return asdict(self)


def _le(module, name, value, bound):
    value = float(value)
    return Check(module, name, value, float(bound), bool(np.isfinite(value) and value <= bound))


def _ge(module, name, value, bound):
    value = float(value)
    return Check(module, name, value, float(bound), bool(np.isfinite(value) and value >= bound))


# -- specfun -----------------------------------------------------------------


def check_bessel_recurrence(rng):
    worst = 0.0
    for _ in range(20):
        nu = complex(rng.uniform(0.1, 2.5), rng.uniform(-0.5, 0.5))
        x = rng.uniform(0.1, 30.0)
        lhs = specfun.bessel_j(nu - 1, x) + specfun.bessel_j(nu + 1, x)
        rhs = 2 * nu / x * specfun.bessel_j(nu, x)
        worst = max(worst, abs(lhs - rhs) / max(abs(rhs), abs(specfun.bessel_j(nu, x)), 1e-3))
    return _le("specfun", "J recurrence", worst, 1e-9)


def check_bessel_derivatives(rng):
    worst, h = 0.0, 1e-4
    for _ in range(10):
        nu = complex(rng.uniform(0.2, 2.0), rng.uniform(-0.3, 0.3))
        x = rng.uniform(0.5, 15.0)
        for sgn, shift in ((1, -1), (-1, 1)):
            def g(y):
                return y ** (sgn * nu) * specfun.bessel_j(nu, y)

            fd = (g(x + h) - g(x - h)) / (2 * h)
            exact = sgn * x ** (sgn * nu) * specfun.bessel_j(nu + shift, x)
            worst = max(worst, abs(fd - exact) / max(abs(exact), 1e-2))
    return _le("specfun", "x^(+-nu) J derivative identities", worst, 1e-6)


def check_bessel_conjugation(rng):
    worst = 0.0
    for _ in range(10):
        nu = complex(rng.uniform(0.1, 2.0), rng.uniform(-1, 1))
        x = rng.uniform(0.1, 20)
        worst = max(worst, abs(specfun.bessel_j(nu.conjugate(), x) - np.conj(specfun.bessel_j(nu, x))))
    return _le("specfun", "J conjugation symmetry", worst, 1e-14)


# -- transforms --------------------------------------------------------------


def _test_function(grid, nu):
    x = grid.nodes
    return transforms.GridFunction(grid, x ** (nu + 0.5) * np.exp(-x * x / 2))


def check_involution(rng):
    grid = transforms.HalfLineGrid.graded(512, 30.0)
    worst = 0.0
    for nu in (0.3, 1.4):
        f = _test_function(grid, nu)
        back = transforms.hankel(nu, transforms.hankel(nu, f, tail_tol=np.inf))
        worst = max(worst, (back - f).norm() / f.norm())
    return _le("transforms", "Hankel involution (graded 512)", worst, 1e-8)


def check_intertwining(rng):
    grid = transforms.HalfLineGrid.graded(1024, 30.0)
    nu = 0.7
    f = _test_function(grid, nu)
    lhs = transforms.hankel(nu - 1, transforms.twisted_derivative(nu, f), tail_tol=np.inf)
    rhs = transforms.GridFunction(grid, grid.nodes * transforms.hankel(nu, f, tail_tol=np.inf).values)
    return _le("transforms", "H_(nu-1) Q0 = xi H_nu", (lhs - rhs).norm() / rhs.norm(), 1e-4)


def check_adjoint(rng):
    grid = transforms.HalfLineGrid.graded(256, 30.0)
    nu = 0.6 + 0.3j
    f = transforms.GridFunction(grid, grid.nodes**1.1 * np.exp(-grid.nodes**2 / 3) * (1 + 0.5j))
    g = transforms.GridFunction(grid, grid.nodes**1.3 * np.exp(-grid.nodes**2 / 5))
    lhs = transforms.hankel(nu, f, tail_tol=np.inf).inner(g)
    rhs = f.inner(transforms.hankel(nu.conjugate(), g, tail_tol=np.inf))
    return _le("transforms", "<H_nu f, g> = <f, H_conj(nu) g>", abs(lhs - rhs) / abs(lhs), 1e-10)


def check_g_reflection(rng):
    s = rng.uniform(-40, 40, 50)
    worst = 0.0
    for nu in (0.8 + 0.3j, 1.3 - 0.6j):
        g = transforms.g_nu(nu, s) * transforms.g_nu(nu, -s)
        worst = max(worst, float(np.max(np.abs(g - 1))))
    worst = max(worst, float(np.max(np.abs(transforms.g_nu(0.7, s) - 1))))
    return _le("transforms", "g_nu(s) g_nu(-s) = 1 and g = 1 for real nu", worst, 1e-12)


def check_g_symbol(rng):
    s = np.linspace(-200, 200, 4001)
    g = transforms.g_nu(0.8 + 0.3j, s)
    dg = np.gradient(g, s)
    return _le("transforms", "sup <s> |g'(s)|", float(np.max(np.sqrt(1 + s * s) * np.abs(dg))), 10.0)


def check_fd_vs_spectral(rng):
    grid = transforms.HalfLineGrid.graded(1024, 30.0)
    nu = 0.7
    f = _test_function(grid, nu)
    a = transforms.bessel_op(nu, f)
    b = transforms.bessel_op_fd(nu, f)
    return _le("transforms", "N_nu spectral vs finite difference", (a - b).norm() / a.norm(), 1e-3)


# -- fpint -------------------------------------------------------------------


def check_fp_linearity(rng):
    nu, a = 0.3, 1.5 + 0.5j
    s1 = power_resolvent_symbol(nu, -2, a)
    s2 = power_resolvent_symbol(nu, -4, a)
    both = fp_integral(s1) + 2.0 * fp_integral(s2)
    ref = fp_power_resolvent(nu, -2, a) + 2.0 * fp_power_resolvent(nu, -4, a)
    return _le("fpint", "fp_integral linear, matches closed form", abs(both - ref) / abs(ref), 1e-8)


def check_fp_nu_derivative(rng):
    worst = 0.0
    for nu, m, a in ((0.3, -2, 1.0), (0.7 + 0.2j, -4, 2 - 1j)):
        h = 1e-5
        fd = (fp_power_resolvent(nu + h, m, a) - fp_power_resolvent(nu - h, m, a)) / (2 * h)
        F = fp_power_resolvent(nu, m, a)
        exact = F * (cmath.log(a) + digamma(1 + nu) - digamma(-1 - nu - m / 2))
        worst = max(worst, abs(fd - exact) / abs(exact))
    return _le("fpint", "nu-derivative of the closed form", worst, 1e-5)


def check_fp_branch(rng):
    jumps = []
    for phi in (0.1, 1.5, 3.0):
        for sgn in (1, -1):
            th = sgn * phi
            v1 = fp_power_resolvent(0.4, -2, cmath.exp(1j * th))
            v2 = fp_power_resolvent(0.4, -2, cmath.exp(1j * (th + 1e-6)))
            jumps.append(abs(v1 - v2) / abs(v1))
    return _le("fpint", "continuity in arg a", max(jumps), 1e-5)


# -- multcalc ----------------------------------------------------------------


def check_normal_idempotence(rng):
    nu = 0.3
    R = resolvent(1.3)
    terms, _ = push_x_left(MultiplierChain((R, XPower(2), R)), nu)
    worst = 0
    for t in terms:
        again, _ = push_x_left(t, nu)
        worst = max(worst, 0 if (len(again) == 1 and again[0].factors == t.factors) else 1)
    return _le("multcalc", "push_x_left idempotent on normal chains", worst, 0)


def check_order_lowering(rng):
    nu = 0.45
    sym = RationalXi.resolvent(1.7, 2)
    bad = 0
    for lr in ((0, 0), (0, 1), (1, 0), (1, 1)):
        m = Multiplier(*lr, sym)
        free, shifted = _push_rule(m, nu)
        bad += free.sym.order != sym.order - 1
        bad += shifted.sym.order != sym.order
    return _le("multcalc", "x-commutation lowers order by one", bad, 0)


def check_resolvent_homogeneity(rng):
    nu = 0.35 + 0.1j
    a, tau = 1.2, 1.7
    degs = []
    for n in (1, 2, 3):
        fs = tuple(resolvent(a) for _ in range(n))
        gs = tuple(resolvent(a * tau * tau) for _ in range(n))
        v1, _ = gamma_pair_chain(nu, MultiplierChain(fs))
        v2, _ = gamma_pair_chain(nu, MultiplierChain(gs))
        degs.append(cmath.log(v2 / v1) / (2 * math.log(tau)))
    steps = [degs[1] - degs[0], degs[2] - degs[1]]
    return _le("multcalc", "extra resolvent lowers a-degree by one", max(abs(s + 1) for s in steps), 1e-10)


# -- scatter -----------------------------------------------------------------


def check_lambda0(rng):
    m = ModeModel(0.3, (1.4 + 0.2j, 0, 0.05))
    return _le("scatter", "Lambda_0 equals dn_product", abs(dn_expansion(m, 0)[0] - dn_product(0.3, 1.4 + 0.2j)), 0.0)


def check_constant_relation(rng):
    worst = 0.0
    for _ in range(20):
        nu = complex(rng.uniform(0.05, 2.9), rng.uniform(-1, 1))
        worst = max(worst, abs(boundary_constant(nu) - 2 * nu * dn_constant(nu)) / abs(boundary_constant(nu)))
    return _le("scatter", "boundary constant = 2 nu dn_constant", worst, 1e-12)


def check_perturbative_slope(rng):
    nu, a0 = 0.3, 1.0
    T = dn_transfer(nu, 1, a0, 2)
    base = dn_product(nu, a0)
    ss = np.array([1e-3, 3e-3, 1e-2, 3e-2, 1e-1])
    r = [abs(ode_dn(ModeModel(nu, (a0, 0, s))).lam - base - s * T) for s in ss]
    slope = np.polyfit(np.log(ss), np.log(r), 1)[0]
    return _le("scatter", "second-order remainder slope", abs(slope - 2.0), 0.1)


def check_transfer_zeros(rng):
    grid = np.arange(0.001, 3.0, 0.001)
    vals = []
    for nu in grid:
        try:
            vals.append(dn_transfer(nu, 1, 1.0, 2, check=False).real)
        except ExceptionalParameter:
            vals.append(np.nan)
    v = np.array(vals)
    ok = np.isfinite(v[:-1]) & np.isfinite(v[1:])
    changes = int(np.sum(np.sign(v[:-1][ok]) != np.sign(v[1:][ok])))
    return _le("scatter", "sign changes of Re transfer(N=2) on (0,3)", changes, 50)


# -- oracle ------------------------------------------------------------------


def check_oracle_tolerance(rng):
    m = ModeModel(0.7, (2.0 + 0.5j, 0, 0.1))
    r1 = ode_dn(m, rtol=1e-12)
    r2 = ode_dn(m, rtol=5e-13)
    return _le("oracle", "rtol halving within error estimate", abs(r1.lam - r2.lam) - max(r1.err, 1e-14), 0.0)


def check_oracle_start(rng):
    m = ModeModel(0.7, (2.0, 0, 0.1))
    r1 = ode_dn(m)
    r2 = ode_dn(m, x_start=1.5 * m.slab_eps)
    return _le("oracle", "x_start independence", abs(r1.lam - r2.lam) / abs(r1.lam), 1e-8)


def check_oracle_branches(rng):
    r = ode_dn(ModeModel(1.25, (0.5,)))
    return _le("oracle", "lambda = G/F", abs(r.lam - r.G / r.F) / abs(r.lam), 1e-15)


# -- pde_sim -----------------------------------------------------------------


def check_pde_symmetry(rng):
    fld = TwistedField.build(0.3, 64, 0.05)
    n = 64
    A = np.zeros((n - 1, n - 1))
    for j in range(1, n):
        e = np.zeros(n + 1)
        e[j] = 1.0
        A[:, j - 1] = fld.apply(e)[1:n]
    Mw = np.diag(fld.mass[1:n])
    S = Mw @ A
    return _le("pde_sim", "mass-weighted operator symmetric", np.max(np.abs(S - S.T)) / np.max(np.abs(S)), 1e-12)


def check_pde_energy(rng):
    cfg = GridConfig(nodes=1024, x_max=20.0, t_end=16.0)
    rec = run_forward(0.7, gaussian_pulse(4.0, 0.4), cfg, energy=True)
    after = rec.energy[rec.t[1:] > 8.0]
    return _le("pde_sim", "leapfrog energy drift after source", np.ptp(after) / np.max(np.abs(after)), 1e-12)


def check_pde_convergence(rng):
    errs = []
    for M in (1024, 2048):
        rec = run_forward(0.3, gaussian_pulse(4.0, 0.4), GridConfig(nodes=M, x_max=20.0, t_end=16.0))
        errs.append(neumann_error(rec)[2])
    return _ge("pde_sim", "Neumann error ratio under doubling", errs[0] / errs[1], 1.7)


# -- inverse -----------------------------------------------------------------


def check_inverse_product(rng):
    from .inverse import InversionProblem, eta_norm2, layer_strip
    from .scatter import DNRow, DNTable

    nu = 0.3
    tab = DNTable()
    for e in np.geomspace(1, 10, 6):
        tab.add(DNRow(0.0, float(e), dn_product(nu, e * e + 1), "closed_form", 0.0))
    rep = layer_strip(
        InversionProblem(nu, tab, background=lambda t, e: eta_norm2(e) + 1, depth=2, iterations=2)
    )
    return _le("inverse", "product data gives a_2 = 0", max(abs(v) for v in rep.coefficients[2]), 1e-8)


CHECKS = [
    check_bessel_recurrence,
    check_bessel_derivatives,
    check_bessel_conjugation,
    check_involution,
    check_intertwining,
    check_adjoint,
    check_g_reflection,
    check_g_symbol,
    check_fd_vs_spectral,
    check_fp_linearity,
    check_fp_nu_derivative,
    check_fp_branch,
    check_normal_idempotence,
    check_order_lowering,
    check_resolvent_homogeneity,
    check_lambda0,
    check_constant_relation,
    check_perturbative_slope,
    check_transfer_zeros,
    check_oracle_tolerance,
    check_oracle_start,
    check_oracle_branches,
    check_pde_symmetry,
    check_pde_energy,
    check_pde_convergence,
    check_inverse_product,
]


def run_suite(seed: int = 0) -> list[Check]:
    out = []
    for fn in CHECKS:
        rng = np.random.default_rng(seed)
        try:
            out.append(fn(rng))
        except Exception as exc:  # a crash is a failed invariant, reported by name
            out.append(Check(fn.__module__.rsplit(".", 1)[-1], f"{fn.__name__}: {type(exc).__name__}: {exc}", math.nan, math.nan, False))
    return out
