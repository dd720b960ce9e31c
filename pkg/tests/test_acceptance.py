"""Acceptance criteria 1-10, one visible PASS/FAIL line each.

Tolerances below are the pinned acceptance values; they are not tuned to the
implementation.
"""

import cmath
import math
import time

import numpy as np
import pytest

from adsdn.fpint import fp_integral, fp_power_resolvent, power_resolvent_symbol
from adsdn.inverse import InversionProblem, eta_norm2, layer_strip
from adsdn.model import ModeModel
from adsdn.oracle import ode_dn
from adsdn.pde_sim import GridConfig, energy_form_check, gaussian_pulse, neumann_error, run_forward
from adsdn.scatter import (
    DNRow,
    DNTable,
    boundary_constant,
    complex_power,
    conformal_residue,
    dn_constant,
    dn_product,
    dn_transfer,
)
from adsdn.specfun import principal_power
from adsdn.transforms import (
    GridFunction,
    HalfLineGrid,
    bessel_op,
    bessel_op_fd,
    g_nu,
    hankel,
    i_nu,
    i_nu_mellin,
)

NUS = (0.3, 0.7, 1.25, 2.6)
AS = (0.5, 1.0, 4.0, 2 * cmath.exp(1j * math.pi / 3), 1 - 0.3j)


def test_criterion_1_product_dn_identity(report):
    t0 = time.perf_counter()
    worst = 0.0
    for nu in NUS:
        for a in AS:
            ref = dn_product(nu, a)
            worst = max(worst, abs(ode_dn(ModeModel(nu, (a,))).lam - ref) / abs(ref))
    dt = time.perf_counter() - t0
    report("criterion 1 product DN identity", worst <= 1e-6 and dt <= 10, f"max rel err {worst:.2e} (<= 1e-6), {dt:.2f} s (<= 10 s)")


def test_criterion_2_finite_part_closed_form(report):
    t0 = time.perf_counter()
    worst = 0.0
    for nu in NUS:
        for a in AS:
            for m in (-2, -4, -6):
                ref = fp_power_resolvent(nu, m, a)
                worst = max(worst, abs(fp_integral(power_resolvent_symbol(nu, m, a)) - ref) / abs(ref))
    dt = time.perf_counter() - t0
    report("criterion 2 finite-part closed form", worst <= 1e-8 and dt <= 5, f"max rel err {worst:.2e} (<= 1e-8), {dt:.2f} s (<= 5 s)")


def test_criterion_3_complex_power(report):
    worst = 0.0
    for nu in NUS:
        for a in AS:
            ref = principal_power(a, nu)
            worst = max(worst, abs(complex_power(nu, a) - ref) / abs(ref))
    report("criterion 3 complex power", worst <= 1e-6, f"max rel err {worst:.2e} (<= 1e-6)")


TEST_FUNCTIONS = (
    lambda x, nu: x ** (nu + 0.5) * np.exp(-x * x / 2),
    lambda x, nu: x ** (nu + 0.5) * (1 + x * x) * np.exp(-x * x),
    lambda x, nu: x ** (nu + 0.5) * np.cos(x) * np.exp(-x * x / 4),
)


def test_criterion_4_hankel_involution_and_diagonalization(report):
    inv_worst, fd_worst, ratio_worst = 0.0, 0.0, np.inf
    for nu in (0.3, 0.7, 1.4):
        grid = HalfLineGrid.graded(2048, 30.0)
        for f in TEST_FUNCTIONS:
            u = GridFunction(grid, f(grid.nodes, nu))
            back = hankel(nu, hankel(nu, u, tail_tol=np.inf))
            inv_worst = max(inv_worst, (back - u).norm() / u.norm())
            a, b = bessel_op(nu, u), bessel_op_fd(nu, u)
            fd_worst = max(fd_worst, (a - b).norm() / a.norm())
        # graded grids sit at roundoff; the doubling rate is read on uniform grids
        for f in TEST_FUNCTIONS:
            errs = []
            for M in (512, 1024, 2048):
                g = HalfLineGrid.graded(M, 30.0, p=1.0)
                u = GridFunction(g, f(g.nodes, nu))
                back = hankel(nu, hankel(nu, u, tail_tol=np.inf), tail_tol=np.inf)
                errs.append((back - u).norm() / u.norm())
            ratio_worst = min(ratio_worst, errs[0] / errs[1], errs[1] / errs[2])
    ok = inv_worst <= 1e-4 and fd_worst <= 1e-3 and ratio_worst >= 2.0
    report(
        "criterion 4 Hankel involution and diagonalization",
        ok,
        f"involution {inv_worst:.2e} (<= 1e-4), spectral vs FD {fd_worst:.2e} (<= 1e-3), min error ratio per doubling {ratio_worst:.2f} (>= 2)",
    )


def test_criterion_5_conformal_residue(report):
    worst = 0.0
    for k in (1, 2):
        for a in (1.0, 3.0, 2 * cmath.exp(1j * math.pi / 4)):
            ref = principal_power(a, k)
            worst = max(worst, abs(conformal_residue(k, a, 1e-3) - ref) / abs(ref))
    report("criterion 5 conformal residue", worst <= 1e-4, f"max rel err {worst:.2e} (<= 1e-4)")


def test_criterion_6_transfer_linearization(report):
    ss = np.array([1e-3, 3e-3, 1e-2, 3e-2, 1e-1])
    slopes = {}
    for nu in (0.3, 0.7):
        for a0 in (1.0, 4.0):
            T = dn_transfer(nu, 1, a0, 2)
            base = dn_product(nu, a0)
            r = [abs(ode_dn(ModeModel(nu, (a0, 0, s))).lam - base - s * T) for s in ss]
            slopes[(nu, a0)] = np.polyfit(np.log(ss), np.log(r), 1)[0]
    worst = max(abs(v - 2.0) for v in slopes.values())
    detail = ", ".join(f"nu={k[0]} a0={k[1]}: {v:.3f}" for k, v in slopes.items())
    report("criterion 6 transfer linearization", worst <= 0.1, f"slopes {detail} (2.0 +- 0.1)")


def test_criterion_7_layer_stripping(report):
    t0 = time.perf_counter()
    nu, s = 0.3, 1e-2
    etas = np.geomspace(1.0, 10.0, 12)
    table = DNTable()
    for e in etas:
        r = ode_dn(ModeModel(nu, (e * e + 1, 0, s * (2 + e * e))))
        table.add(DNRow(0.0, float(e), r.lam, "ode_oracle", r.err))
    problem = InversionProblem(nu, table, background=lambda tau, eta: eta_norm2(eta) - tau * tau + 1)
    fit = layer_strip(problem).fits[2]
    errs = [abs(fit[0] - 2 * s) / (2 * s), abs(fit[1] - s) / s]
    dt = time.perf_counter() - t0
    report(
        "criterion 7 layer stripping",
        max(errs) <= 1e-3 and dt <= 30,
        f"rel err constant {errs[0]:.2e}, |eta|^2 slope {errs[1]:.2e} (<= 1e-3), {dt:.1f} s (<= 30 s)",
    )


def test_criterion_8_time_domain(report):
    t0 = time.perf_counter()
    pulse = gaussian_pulse(4.0, 0.4)
    errs, ratios = {}, {}
    for nu in (0.3, 0.7):
        e = [neumann_error(run_forward(nu, pulse, GridConfig(nodes=M, x_max=20.0, t_end=16.0)))[2] for M in (4096, 8192)]
        errs[nu], ratios[nu] = e[0], e[0] / e[1]
    dt = time.perf_counter() - t0
    ok = max(errs.values()) <= 0.05 and min(ratios.values()) >= 1.7 and dt <= 300
    detail = ", ".join(f"nu={nu}: err {errs[nu]:.2e} ratio {ratios[nu]:.2f}" for nu in errs)
    report("criterion 8 time-domain Neumann trace", ok, f"{detail} (err <= 5%, ratio >= 1.7), {dt:.1f} s")


def test_criterion_9a_mellin_agreement(report):
    nu = 0.8 + 0.3j
    f = lambda x: x ** (nu + 0.5) * np.exp(-x * x / 2)  # noqa: E731
    graded = HalfLineGrid.graded(1024, 14.0)
    logg = HalfLineGrid.log_uniform(1024, 1e-8, 14.0)
    ref = i_nu(nu, GridFunction.sample(graded, f), logg)
    got = i_nu_mellin(nu, GridFunction.sample(logg, f))
    err = (got - ref).norm() / ref.norm()
    report("criterion 9 (Mellin agreement)", err <= 1e-3, f"i_nu vs i_nu_mellin {err:.2e} (<= 1e-3)")


def test_criterion_9b_energy_positivity(report):
    rep = energy_form_check(0.8 + 0.3j, n_functions=100, seed=0)
    # forms are normalised by the squared norm, so the bound is -1e-10
    worst = min(rep.min_real_q0, rep.min_real_qj)
    report("criterion 9 (energy positivity)", worst >= -1e-10, f"min Re form / norm^2 = {worst:.3e} (>= -1e-10)")


def test_criterion_9c_unimodular_multiplier(report):
    s = np.random.default_rng(0).uniform(-50, 50, 200)
    dev = float(np.max(np.abs(np.abs(g_nu(0.8 + 0.3j, s)) - 1)))
    report("criterion 9 (|g_nu(s)| = 1)", dev <= 1e-12, f"max ||g| - 1| = {dev:.3e} (<= 1e-12)")


def test_criterion_10_convention_constants(report):
    rng = np.random.default_rng(10)
    worst = 0.0
    for _ in range(20):
        nu = complex(rng.uniform(0.05, 2.95), rng.uniform(-1.0, 1.0))
        lhs = boundary_constant(nu)
        worst = max(worst, abs(lhs - 2 * nu * dn_constant(nu)) / abs(lhs))
    report("criterion 10 convention constants", worst <= 1e-12, f"max rel diff {worst:.2e} (<= 1e-12)")
