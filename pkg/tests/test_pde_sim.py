import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from adsdn.errors import CFLViolated, ReflectionContamination
from adsdn.pde_sim import (
    GridConfig,
    TwistedField,
    dirichlet_branch_coeffs,
    energy_form_check,
    fractional_reference,
    gaussian_pulse,
    neumann_error,
    run_forward,
    save_neumann_csv,
)
from adsdn.scatter import dn_constant

PULSE = gaussian_pulse(4.0, 0.4)
COARSE = GridConfig(nodes=1024, x_max=20.0, t_end=16.0, snapshot_stride=200)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 1.95).filter(lambda v: abs(v - 1) > 0.05))
def test_branch_coefficients_solve_radial_recursion(nu):
    # (d_x^2 + (1-2nu)/x d_x) x^(2k) = 2k (2k - 2nu) x^(2k-2)
    c = dirichlet_branch_coeffs(nu, 4)
    for k in range(1, 5):
        assert c[k] * 2 * k * (2 * k - 2 * nu) == pytest.approx(c[k - 1], rel=1e-12)


def test_mass_matches_weighted_cell_measure():
    fld = TwistedField.build(0.3, 64, 0.1)
    x = fld.x
    ref = [integrate.quad(lambda y: y**0.4, x[j] - 0.05, x[j] + 0.05)[0] for j in (1, 5, 30)]
    assert np.allclose(fld.mass[[1, 5, 30]], ref, rtol=1e-10)


def test_guards():
    with pytest.raises(CFLViolated):
        run_forward(0.3, PULSE, GridConfig(nodes=256, cfl=0.6))
    with pytest.raises(ReflectionContamination):
        run_forward(0.3, PULSE, GridConfig(nodes=256, x_max=10.0, t_end=16.0))
    with pytest.raises(ValueError):
        run_forward(0.3, lambda t: np.ones_like(t), GridConfig(nodes=256))
    with pytest.raises(ValueError):
        run_forward(0.3 + 0.1j, PULSE, GridConfig(nodes=256))


@pytest.mark.parametrize("nu", [0.3, 1.4])
def test_energy_conserved_after_pulse(nu):
    rec = run_forward(nu, PULSE, COARSE, energy=True)
    late = rec.energy[rec.t[1:] > 8.0]
    assert late.min() > 0
    assert (late.max() - late.min()) / late.max() <= 1e-10


@pytest.mark.parametrize("nu", [0.3, 1.4])
def test_no_signal_ahead_of_front(nu):
    rec = run_forward(nu, PULSE, COARSE)
    start = 4.0 - 8 * 0.4
    for t, w in rec.snapshots[1:]:
        ahead = rec.field.x > (t - start) + 1.0
        if ahead.any():
            assert np.abs(w[ahead]).max() <= 1e-12 * np.abs(w).max()


def _caputo(alpha, df, t):
    """(1/Gamma(m-alpha)) int_0^t f^(m)(s) (t-s)^(m-1-alpha) ds for f flat at 0."""
    m = math.ceil(alpha)
    val, _ = integrate.quad(df[m], 0, t, weight="alg", wvar=(0.0, m - 1 - alpha), limit=400)
    return val / math.gamma(m - alpha)


@pytest.mark.parametrize("nu", [0.3, 0.7, 1.3])
def test_fractional_reference_matches_quadrature(nu):
    t0, s = 4.0, 0.4
    g = lambda t: np.exp(-(((t - t0) / s) ** 2))  # noqa: E731
    df = {
        1: lambda t: -2 * (t - t0) / s**2 * g(t),
        2: lambda t: (4 * (t - t0) ** 2 / s**4 - 2 / s**2) * g(t),
        3: lambda t: (-8 * (t - t0) ** 3 / s**6 + 12 * (t - t0) / s**4) * g(t),
    }
    dt = 0.005
    t = dt * np.arange(int(16 / dt) + 1)
    out = fractional_reference(nu, g(t), dt).real
    C = float(np.real(dn_constant(nu)))
    for tk in (3.5, 4.2, 6.0, 12.0):
        j = int(round(tk / dt))
        ref = C * _caputo(2 * nu, df, t[j])
        assert abs(out[j] - ref) <= 2e-4 * np.abs(out).max()


@pytest.mark.parametrize("nu", [0.3, 0.7])
def test_neumann_trace_coarse(nu):
    _, _, err = neumann_error(run_forward(nu, PULSE, COARSE))
    assert err <= 5e-3


def test_energy_forms_trivial_for_real_order():
    rep = energy_form_check(0.6, n_functions=10, seed=1, M=2048)
    assert abs(rep.min_real_qj - 1) <= 1e-10 and rep.max_imag_qj <= 1e-10
    assert abs(rep.min_real_q0 - 1) <= 1e-10
    assert rep.norm_ratio_min == pytest.approx(1.0, abs=1e-10)


def test_energy_forms_complex_order():
    rep = energy_form_check(0.8 + 0.3j, n_functions=20, seed=3, M=2048)
    assert rep.min_real_q0 > 0 and rep.min_real_qj > 0
    assert 0 < rep.norm_ratio_min <= rep.norm_ratio_max
    with pytest.raises(ValueError):
        energy_form_check(-0.2)
    assert set(rep.to_dict()) >= {"nu", "min_real_q0", "norm_ratio_max"}


def test_neumann_csv(tmp_path):
    path = tmp_path / "n.csv"
    save_neumann_csv(path, np.array([0.0, 0.5]), np.array([1.0, 2.0 + 1.0j]))
    rows = path.read_text().splitlines()
    assert rows[0] == "t,re,im" and rows[2] == "0.5,2.0,1.0"
