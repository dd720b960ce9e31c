"""Time-domain solver for the twisted wave equation on the half-line.

The unknown is w = x^(nu-1/2) u, which obeys

    x^(1-2nu) w_tt = d_x (x^(1-2nu) d_x w),   w(0, t) = f(t),

for the product metric with d = 1 (boundary wave operator -d_t^2 ... here
P = N_nu + d_t^2).  Space is discretised by a finite-volume scheme: nodes
x_j = j dx, dual-cell masses m_j = int x^(1-2nu) over [x_(j-1/2), x_(j+1/2)]
and face conductances k_(j+1/2) = 2nu / (x_(j+1)^(2nu) - x_j^(2nu)), which
are exact for the steady profiles 1 and x^(2nu).  Time stepping is leapfrog.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import AliasingDetected, CFLViolated, ExtrapolationUnstable, ReflectionContamination
from .model import check_mass
from .scatter import dn_constant
from .transforms import GridFunction, HalfLineGrid, i_nu_mellin, twisted_derivative

__all__ = [
    "GridConfig",
    "TwistedField",
    "SolutionRecord",
    "gaussian_pulse",
    "run_forward",
    "extract_neumann",
    "neumann_error",
    "dirichlet_branch_coeffs",
    "fractional_reference",
    "energy_form_check",
    "EnergyReport",
    "save_neumann_csv",
    "save_snapshots_csv",
]

_N_FACES = 4  # faces kept every step for the Neumann extraction
_DEFECT_NODES = 16  # near-boundary nodes that receive the branch defect source


def dirichlet_branch_coeffs(nu: float, K: int = 2) -> list:
    """c_k with w = sum_k c_k x^(2k) f^(2k)(t) for the Dirichlet branch."""
    s = 0.5 - nu
    c = [1.0]
    for k in range(1, K + 1):
        c.append(c[-1] / ((s + 2 * k) * (s + 2 * k - 1) - (nu * nu - 0.25)))
    return c


@dataclass(frozen=True)
class GridConfig:
    nodes: int = 4096
    x_max: float = 20.0
    cfl: float = 0.5
    t_start: float = 0.0
    t_end: float = 16.0
    snapshot_stride: int = 0

    @property
    def dx(self) -> float:
        return self.x_max / self.nodes

    @property
    def dt(self) -> float:
        return self.cfl * self.dx


@dataclass
class TwistedField:
    """Finite-volume data of the scheme for a real order nu."""

    nu: float
    dx: float
    x: np.ndarray
    mass: np.ndarray
    cond: np.ndarray

    @classmethod
    def build(cls, nu: float, nodes: int, dx: float) -> "TwistedField":
        x = dx * np.arange(nodes + 1)
        half = dx * (np.arange(nodes + 1) + 0.5)
        p = 2 - 2 * nu
        mass = np.empty(nodes + 1)
        mass[1:] = (half[1:] ** p - half[:-1] ** p) / p
        mass[0] = np.nan  # Dirichlet node
        y = x ** (2 * nu)
        cond = 2 * nu / np.diff(y)
        return cls(nu, dx, x, mass, cond)

    def apply(self, w: np.ndarray) -> np.ndarray:
        """Interior values of M^-1 (div k grad) w; entry 0 is unused."""
        flux = self.cond * np.diff(w)
        out = np.zeros_like(w)
        out[1:-1] = (flux[1:] - flux[:-1]) / self.mass[1:-1]
        # last node: zero flux beyond x_max (never reached by the signal)
        out[-1] = -flux[-1] / self.mass[-1]
        return out

    def branch_defect(self, K: int = 2, n: int = _DEFECT_NODES) -> np.ndarray:
        """Rows k-1: truncation error of the scheme on c_k x^(2k), k = 1..K,
        at nodes 1..n.  Adding sum_k f^(2k)(t) row_k as a source makes the
        update exact on the Dirichlet branch expansion near the boundary."""
        c = dirichlet_branch_coeffs(self.nu, K)
        x = self.x
        rows = np.zeros((K, len(x)))
        for k in range(1, K + 1):
            prof = c[k] * x ** (2 * k)
            exact = c[k - 1] * x ** (2 * k - 2)
            rows[k - 1, 1 : n + 1] = (exact - self.apply(prof))[1 : n + 1]
        return rows

    def max_rate(self) -> float:
        """Gershgorin bound on the spectrum of M^-1 K."""
        k = np.concatenate([self.cond, [0.0]])
        return float(np.max(2 * (k[1:] + k[:-1])[:-1] / self.mass[1:-1]))


@dataclass
class SolutionRecord:
    nu: float
    config: GridConfig
    t: np.ndarray
    f: np.ndarray
    f2: np.ndarray  # second time derivative of the datum
    f4: np.ndarray
    face_flux: np.ndarray  # (steps, _N_FACES) fluxes k (w_(j+1) - w_j)
    field: TwistedField
    snapshots: list = field(default_factory=list)
    energy: np.ndarray | None = None
    front: float = 0.0


def gaussian_pulse(t0: float, sigma: float, cutoff: float = 8.0) -> Callable:
    """exp(-((t-t0)/sigma)^2), set to zero beyond cutoff*sigma from t0."""

    def f(t):
        t = np.asarray(t, dtype=float)
        z = (t - t0) / sigma
        return np.where(np.abs(z) < cutoff, np.exp(-z * z), 0.0)

    return f


def _support_start(f: Callable, t: np.ndarray, tol=1e-300) -> float:
    vals = np.abs(f(t))
    nz = np.nonzero(vals > tol)[0]
    return float(t[nz[0]]) if len(nz) else float("inf")


def run_forward(nu: float, f: Callable, config: GridConfig = GridConfig(), energy: bool = False) -> SolutionRecord:
    """Leapfrog evolution from rest with Dirichlet datum w(0, t) = f(t)."""
    nu = check_mass(nu)
    if nu.imag != 0 or not (0 < nu.real < 2) or abs(nu.real - 1) < 1e-12:
        raise ValueError("the simulator takes real nu in (0,1) or (1,2)")
    nu = nu.real
    if config.cfl > 0.5:
        raise CFLViolated(f"dt/dx = {config.cfl} exceeds 0.5")
    fld = TwistedField.build(nu, config.nodes, config.dx)
    dt = config.dt
    if dt * math.sqrt(fld.max_rate()) > 2.0:
        raise CFLViolated(f"dt = {dt:g} above the leapfrog limit {2 / math.sqrt(fld.max_rate()):g}")
    steps = int(round((config.t_end - config.t_start) / dt))
    t = config.t_start + dt * np.arange(steps + 1)
    t0 = _support_start(f, t)
    if np.isfinite(t0) and (config.t_end - max(t0, config.t_start)) >= config.x_max:
        raise ReflectionContamination(
            f"front reaches x_max={config.x_max} before t_end={config.t_end} (support starts at {t0:g})"
        )
    fv = np.asarray(f(t), dtype=float)
    if fv[0] != 0.0:
        raise ValueError("datum must vanish at the start time (forward problem from rest)")
    f2 = np.gradient(np.gradient(fv, dt), dt)
    f4 = np.gradient(np.gradient(f2, dt), dt)

    n = config.nodes + 1
    w_prev = np.zeros(n)
    w = np.zeros(n)
    w[0] = fv[0]
    w_prev[0] = fv[0]
    fluxes = np.zeros((steps + 1, _N_FACES))
    fluxes[0] = fld.cond[:_N_FACES] * np.diff(w[: _N_FACES + 1])
    snaps = []
    stride = config.snapshot_stride
    if stride:
        snaps.append((t[0], w.copy()))
    en = np.zeros(steps) if energy else None
    dt2 = dt * dt
    defect = fld.branch_defect()
    nd = _DEFECT_NODES + 1
    for s in range(1, steps + 1):
        w_next = 2 * w - w_prev + dt2 * fld.apply(w)
        w_next[:nd] += dt2 * (f2[s - 1] * defect[0, :nd] + f4[s - 1] * defect[1, :nd])
        w_next[0] = fv[s]
        if energy:
            # leapfrog invariant between levels s-1 and s
            v = (w[1:] - w_prev[1:]) / dt
            en[s - 1] = 0.5 * np.sum(fld.mass[1:] * v * v) + 0.5 * np.sum(fld.cond * np.diff(w) * np.diff(w_prev))
        w_prev, w = w, w_next
        fluxes[s] = fld.cond[:_N_FACES] * np.diff(w[: _N_FACES + 1])
        if stride and s % stride == 0:
            snaps.append((t[s], w.copy()))
    front = config.t_end - t0 if np.isfinite(t0) else 0.0
    return SolutionRecord(nu, config, t, fv, f2, f4, fluxes, fld, snaps, en, front)


def extract_neumann(rec: SolutionRecord, n_faces: int = 3) -> np.ndarray:
    """u_+(t) = (2nu)^-1 gamma_+ u(t) from the fluxes at the first faces.

    The Dirichlet branch contributes f'' x^2 / (4 - 4nu) + ... to w; its face
    fluxes are subtracted exactly.  The Neumann branch x^(2nu)(g + g'' x^2 c)
    contributes 2nu (g + c g'' r_j) with r_j known per face; a least-squares
    fit of the corrected fluxes in r_j returns 2nu g.
    """
    nu = rec.nu
    x = rec.field.x
    k = rec.field.cond[:n_faces]
    xl, xr = x[:n_faces], x[1 : n_faces + 1]
    _, c1, c2 = dirichlet_branch_coeffs(nu, 2)
    corr = k[None, :] * (
        c1 * np.outer(rec.f2, xr**2 - xl**2) + c2 * np.outer(rec.f4, xr**4 - xl**4)
    )
    flux = rec.face_flux[:, :n_faces] - corr
    r = (xr ** (2 * nu + 2) - xl ** (2 * nu + 2)) / (xr ** (2 * nu) - xl ** (2 * nu))
    A = np.stack([np.ones(n_faces), r / r[0]], axis=1)
    if np.linalg.cond(A) > 1e8:
        raise ExtrapolationUnstable("face positions do not separate the expansion terms")
    coef, *_ = np.linalg.lstsq(A, flux.T, rcond=None)
    return coef[0] / (2 * nu)


def fractional_reference(
    nu: float, f: np.ndarray, dt: float, pad: int = 8, alias_tol: float = 1e-8, damping: float | None = None
) -> np.ndarray:
    """Causal 2^(-2nu) Gamma(-nu)/Gamma(nu) (d_t^2)^nu applied to samples f.

    With numpy's transform (synthesis e^(i w t)) the retarded symbol is
    (-(w - i0)^2)^nu = |w|^(2nu) e^(i pi nu sign w), the Fourier multiplier of
    the Riemann-Liouville derivative of order 2nu.  The product is evaluated
    at w - i sigma on e^(-sigma t) f, which damps the periodic images of the
    slowly decaying output tail by e^(-sigma L); ``damping=0`` gives the plain
    diagonal multiplier.
    """
    nu = float(np.real(check_mass(nu)))
    f = np.asarray(f, dtype=float)
    n = len(f)
    N = pad * n
    L = N * dt
    sigma = 30.0 / L if damping is None else float(damping)
    t = dt * np.arange(n)
    spectrum = np.fft.fft(f * np.exp(-sigma * t), N)
    peak = np.max(np.abs(spectrum))
    band = np.abs(spectrum[N // 2 - N // 16 : N // 2 + N // 16])
    if peak > 0 and band.max() > alias_tol * peak:
        raise AliasingDetected(f"spectral tail {band.max() / peak:.2e} of peak")
    w = 2 * np.pi * np.fft.fftfreq(N, dt)
    if sigma > 0:
        mult = (sigma + 1j * w) ** (2 * nu)
    else:
        mult = np.abs(w) ** (2 * nu) * np.exp(1j * np.pi * nu * np.sign(w))
    out = np.fft.ifft(complex(dn_constant(nu)) * mult * spectrum)[:n]
    return out * np.exp(sigma * t)


def neumann_error(rec: SolutionRecord) -> tuple[np.ndarray, np.ndarray, float]:
    """Extracted trace, fractional reference and their relative L2 distance."""
    up = extract_neumann(rec)
    ref = fractional_reference(rec.nu, rec.f, rec.config.dt).real
    return up, ref, float(np.linalg.norm(up - ref) / np.linalg.norm(ref))


# ---------------------------------------------------------------------------
# Energy forms with complex nu


@dataclass(frozen=True)
class EnergyReport:
    nu: complex
    n_functions: int
    min_real_q0: float
    max_imag_q0: float
    min_real_qj: float
    max_imag_qj: float
    norm_ratio_min: float
    norm_ratio_max: float

    def to_dict(self) -> dict:
        return {k: (v if not isinstance(v, complex) else [v.real, v.imag]) for k, v in self.__dict__.items()}


def _random_bumps(rng: np.random.Generator, x: np.ndarray, x_support: float) -> np.ndarray:
    out = np.zeros_like(x, dtype=complex)
    for _ in range(3):
        r = rng.uniform(0.2, 0.25 * x_support)
        c = rng.uniform(r + 0.05, x_support - r)
        amp = rng.normal() + 1j * rng.normal()
        z = (x - c) / r
        inside = np.abs(z) < 1
        bump = np.zeros_like(x)
        bump[inside] = np.exp(-1.0 / (1.0 - z[inside] ** 2))
        out += amp * bump
    return out


def energy_form_check(nu, n_functions: int = 100, seed: int = 0, M: int = 4096, x_lo=1e-4, x_hi=40.0, x_support=6.0) -> EnergyReport:
    """Sample <Q0 u, I_(nu-1) Q0 u> and <u, I_nu u> over random bumps.

    The second form is the mode-level shadow of the tangential forms
    <Q_j u, I_nu Q_j u>, j >= 1, which act on the boundary variables and
    commute with I_nu.  Norms: |u|^2 + <Q0 u, Q0 u> against
    |u|^2 + Re <Q0 u, I_(nu-1) Q0 u>, each normalised by |u|^2 + |Q0 u|^2.
    """
    nu = complex(nu)
    if nu.real <= 0:
        raise ValueError("need Re nu > 0")
    grid = HalfLineGrid.log_uniform(M, x_lo, x_hi)
    rng = np.random.default_rng(seed)
    q0_re, q0_im, qj_re, qj_im, ratios = [], [], [], [], []
    for _ in range(n_functions):
        u = GridFunction(grid, _random_bumps(rng, grid.nodes, x_support))
        q = twisted_derivative(nu, u)
        form0 = q.inner(i_nu_mellin(nu - 1, q))
        formj = u.inner(i_nu_mellin(nu, u))
        n0 = u.norm() ** 2
        nq = q.norm() ** 2
        scale = n0 + nq
        q0_re.append(form0.real / nq)
        q0_im.append(abs(form0.imag) / nq)
        qj_re.append(formj.real / n0)
        qj_im.append(abs(formj.imag) / n0)
        ratios.append(math.sqrt((n0 + form0.real) / scale))
    return EnergyReport(
        nu,
        n_functions,
        float(min(q0_re)),
        float(max(q0_im)),
        float(min(qj_re)),
        float(max(qj_im)),
        float(min(ratios)),
        float(max(ratios)),
    )


# ---------------------------------------------------------------------------
# CSV export


def save_neumann_csv(path, t: np.ndarray, values: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["t", "re", "im"])
        for ti, v in zip(t, np.asarray(values, dtype=complex)):
            wr.writerow([repr(float(ti)), repr(float(v.real)), repr(float(v.imag))])


def save_snapshots_csv(path, rec: SolutionRecord) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["t", "x", "re_w"])
        for ti, w in rec.snapshots:
            for xi, wi in zip(rec.field.x, w):
                wr.writerow([repr(float(ti)), repr(float(xi)), repr(float(wi))])
