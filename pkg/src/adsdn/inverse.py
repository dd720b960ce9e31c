"""Recovery of boundary Taylor coefficients of the mode symbol from DN data.

Order by order, the measured DN value minus the prediction from the
coefficients found so far is divided by the linear transfer coefficient of
the next Taylor coefficient.  The prediction includes the nonlinear terms of
the expansion, so repeating the step converges to the coefficient of the
model rather than its linearisation.  Across a family of modes the
coefficients are fitted as polynomials in |eta|^2.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import BranchAmbiguity, ConfigError, ExceptionalMass, ExceptionalParameter, ResidualNotDecreasing
from .model import ModeModel, check_mass
from .scatter import MAX_DEPTH, DNTable, dn_constant, dn_expansion, dn_transfer, transfer_scale

__all__ = ["InversionProblem", "InversionReport", "recover_a0", "layer_strip", "eta_norm2"]


def eta_norm2(eta) -> float:
    return float(np.sum(np.square(np.atleast_1d(np.asarray(eta, dtype=float)))))


@dataclass
class InversionProblem:
    nu: complex
    measured: DNTable
    known_background: bool = True
    background: Callable | None = None  # (tau, eta) -> a_0
    max_order: int = 2
    fit_degree: int = 1
    even: bool = True
    d: int = 1
    iterations: int = 4
    depth: int = 6
    transfer_floor: float = 1e-8

    def __post_init__(self):
        self.nu = check_mass(self.nu)
        rows = self.measured.rows
        methods = {r.method for r in rows}
        if len(methods) > 1:
            raise ConfigError(f"measured rows mix provenance tags {sorted(methods)}")
        n_eta = len({round(eta_norm2(r.eta), 14) for r in rows})
        if rows and n_eta < 2 * (self.fit_degree + 1):
            raise ConfigError(f"need at least {2 * (self.fit_degree + 1)} distinct |eta| values, got {n_eta}")
        if self.max_order < 1:
            raise ConfigError("max_order must be at least 1")
        if not self.max_order <= self.depth <= MAX_DEPTH:
            raise ConfigError(f"expansion depth must lie in [max_order, {MAX_DEPTH}]")


@dataclass
class InversionReport:
    nu: complex
    modes: list
    coefficients: dict  # N -> list of per-mode a_N
    fits: dict  # N -> polynomial coefficients in |eta|^2, ascending
    fit_residuals: dict
    condition: dict  # N -> max over modes of 1/|transfer| scaled
    residual_history: dict
    exceptional: list = field(default_factory=list)
    branch_report: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def enc(z):
            z = complex(z)
            return [z.real, z.imag]

        return {
            "nu": enc(self.nu),
            "modes": [{"tau": t, "eta": e} for t, e in self.modes],
            "coefficients": {str(k): [enc(v) for v in vs] for k, vs in self.coefficients.items()},
            "fits": {str(k): [enc(v) for v in vs] for k, vs in self.fits.items()},
            "fit_residuals": {str(k): v for k, v in self.fit_residuals.items()},
            "condition": {str(k): v for k, v in self.condition.items()},
            "residual_history": {str(k): v for k, v in self.residual_history.items()},
            "exceptional": self.exceptional,
            "branch_report": self.branch_report,
        }


def recover_a0(problem: InversionProblem) -> tuple[np.ndarray, dict]:
    """a_0 = (lambda / (2^(-2nu) Gamma(-nu)/Gamma(nu)))^(1/nu) per mode.

    Returns the estimates and a branch report (largest |arg| of the base and
    largest jump of arg a_0 between consecutive modes).
    """
    nu = problem.nu
    C = dn_constant(nu)
    out, args = [], []
    for r in problem.measured.rows:
        lam = complex(r.lam)
        if lam == 0:
            raise ExceptionalParameter("zero DN value")
        base = lam / C
        arg = cmath.phase(base)
        # the principal root must land back on the principal sheet of a
        if abs(arg) > math.pi * (1 - 1e-9) or abs((arg / nu).real) >= math.pi * (1 - 1e-9):
            raise BranchAmbiguity(f"arg of lambda/C = {arg:.6f} is at the branch cut for nu={nu}")
        out.append(cmath.exp(cmath.log(base) / nu))
        args.append(arg)
    a0 = np.array(out, dtype=complex)
    jumps = np.abs(np.diff(np.angle(a0))) if len(a0) > 1 else np.array([0.0])
    report = {
        "max_abs_arg_base": float(max(map(abs, args))) if args else 0.0,
        "max_arg_jump": float(jumps.max()),
        "continuous": bool(jumps.max() < math.pi / 2),
    }
    return a0, report


def _orders(problem: InversionProblem):
    start = 2 if problem.even else 1
    step = 2 if problem.even else 1
    return list(range(start, problem.max_order + 1, step))


def _stalled(hist: list, what: str) -> bool:
    """True once the residual has plateaued; raises if it grew."""
    if len(hist) < 2:
        return False
    if hist[-1] > 1.5 * min(hist[:-1]) and hist[-1] > 1e-13:
        raise ResidualNotDecreasing(f"{what}: residual {min(hist[:-1]):.3e} -> {hist[-1]:.3e}")
    return hist[-1] > 0.5 * hist[-2]


def layer_strip(problem: InversionProblem) -> InversionReport:
    """Recover a_N(eta), N = 2..max_order (all N >= 1 when ``even`` is off)."""
    if not problem.known_background:
        # a single DN value per mode cannot separate a_0 from the higher
        # coefficients; without the background the residual is absorbed in a_0
        raise ConfigError("layer stripping needs the background symbol a_0 (known_background = true)")
    if problem.background is None:
        raise ConfigError("known_background set but no background function supplied")
    nu = problem.nu
    rows = problem.measured.rows
    modes = [(r.tau, r.eta) for r in rows]
    lam = np.array([complex(r.lam) for r in rows])
    a0 = np.array([complex(problem.background(t, e)) for t, e in modes])
    orders = _orders(problem)
    J = problem.depth
    coeffs = {N: np.zeros(len(rows), dtype=complex) for N in orders}
    cond, history, exceptional, transfers = {}, {}, [], {}

    def model_for(i, upto):
        taylor = [a0[i]] + [0j] * max(orders)
        for N in orders:
            if N <= upto:
                taylor[N] = coeffs[N][i]
        return ModeModel(nu, tuple(taylor), (), problem.d, even=problem.even)

    def predict(i, upto):
        return dn_expansion(model_for(i, upto), J).partial_sum(J)

    for N in orders:
        T = np.empty(len(rows), dtype=complex)
        for i in range(len(rows)):
            T[i] = dn_transfer(nu, problem.d, a0[i], N, "metric", check=False)
            if abs(T[i]) < problem.transfer_floor * transfer_scale(nu, a0[i], N):
                exceptional.append({"order": N, "mode": i, "transfer": abs(T[i])})
                raise ExceptionalMass(f"transfer for a_{N} vanishes at mode {i} (|T|={abs(T[i]):.3e})")
        transfers[N] = T
        cond[N] = float(np.max(np.abs(lam) / np.abs(T)))
        hist = []
        for it in range(problem.iterations + 1):
            resid = lam - np.array([predict(i, N) for i in range(len(rows))])
            hist.append(float(np.max(np.abs(resid) / np.abs(lam))))
            if it == problem.iterations or _stalled(hist, f"order {N}"):
                break
            coeffs[N] = coeffs[N] + resid / T
        history[N] = hist
    per_mode = {N: coeffs[N].copy() for N in orders}

    # joint refinement of the polynomial fits: orders separate through their
    # different |eta| scaling, which a single mode cannot resolve
    e2 = np.array([eta_norm2(e) for _, e in modes])
    V = np.vander(e2, problem.fit_degree + 1, increasing=True).astype(complex)
    params = {}
    for N in orders:
        params[N], *_ = np.linalg.lstsq(V, coeffs[N], rcond=None)
    jac = np.hstack([transfers[N][:, None] * V for N in orders])
    # weighting by the leading transfer makes a single order reduce to the per-mode fit
    scale = np.abs(transfers[orders[0]])[:, None]
    joint = []
    for it in range(problem.iterations + 1):
        for N in orders:
            coeffs[N] = V @ params[N]
        resid = lam - np.array([predict(i, max(orders)) for i in range(len(rows))])
        joint.append(float(np.max(np.abs(resid) / np.abs(lam))))
        if it == problem.iterations or _stalled(joint, "joint fit"):
            break
        step, *_ = np.linalg.lstsq(jac / scale, resid / scale[:, 0], rcond=None)
        for j, N in enumerate(orders):
            k = problem.fit_degree + 1
            params[N] = params[N] + step[j * k : (j + 1) * k]
    history["joint"] = joint
    cond["joint"] = float(np.linalg.cond(jac / scale))
    fits = {N: list(params[N]) for N in orders}
    fit_res = {
        N: float(np.linalg.norm(V @ params[N] - per_mode[N]) / max(np.linalg.norm(per_mode[N]), 1e-300))
        for N in orders
    }
    a0_est, branch = recover_a0(problem)
    branch["a0_background_mismatch"] = float(np.max(np.abs(a0_est - a0) / np.abs(a0)))
    return InversionReport(
        nu, modes, {N: list(v) for N, v in per_mode.items()}, fits, fit_res, cond, history, exceptional, branch
    )
