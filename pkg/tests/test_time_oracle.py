"""Time-domain oracle: analytic limits, and agreement with the harmonic solver.

The integrator is validated against closed-form solutions (free decay, the
matrix exponential for constant generators) before being trusted as the
reference for the Fourier-domain results.
"""

import numpy as np
import pytest
import scipy.linalg

from obeforce.errors import PeriodMismatch
from obeforce.field_config import FieldSet, PlaneWave
from obeforce.floquet_solver import solve_periodic
from obeforce.obe_matrices import ObeMatrices, assemble_A
from obeforce.state_layout import AtomicTransition, build_layout, pack, unpack
from obeforce.time_oracle import (
    fourier_extract,
    integrate,
    mean_rates,
    monodromy,
    rate_timeseries,
    settle_to_periodic,
)


def bichromatic_pi():
    lay = build_layout(AtomicTransition(0.5, 1.5))
    w1 = PlaneWave(rabi=2.0, detuning=4.0, k_dir=(1, 0, 0), pol="pi")
    w2 = PlaneWave(rabi=2.0 * np.exp(0.7j), detuning=-4.0, k_dir=(-1, 0, 0), pol="pi")
    fs = FieldSet.build([w1, w2])
    return lay, fs, ObeMatrices.build(lay, fs.deltabar)


@pytest.fixture(scope="module")
def settled_bichromatic():
    lay, fs, mat = bichromatic_pi()
    settled = settle_to_periodic(fs, mat, settle_tol=1e-9)
    return lay, fs, mat, settled, solve_periodic(fs, mat)


def test_free_decay_is_exponential():
    lay = build_layout(AtomicTransition(0, 0, two_level_override=True))
    fs = FieldSet.build([PlaneWave(rabi=0.0, detuning=0.0)])
    mat = ObeMatrices.build(lay, fs.deltabar)
    rho0 = np.diag([1.0, 0.0]).astype(complex)  # excited manifold first
    res = integrate(fs, mat, 8.0, x0=pack(rho0, lay))
    for t in (0.3, 1.0, 2.5, 7.0):
        rho = unpack(res.sol(t), lay)
        assert rho[0, 0].real == pytest.approx(np.exp(-t), abs=1e-10)


def test_integrator_matches_matrix_exponential():
    # constant generator: x(t) = e^(At)(x0 + A^-1 b) - A^-1 b
    lay = build_layout(AtomicTransition(1, 2))
    fs = FieldSet.build([PlaneWave(rabi=3.0, detuning=-1.0, pol="sigma+")])
    mat = ObeMatrices.build(lay, fs.deltabar)
    a = assemble_A(mat, fs.omega_q(0.0))
    shift = np.linalg.solve(a, mat.b)
    res = integrate(fs, mat, 20.0)
    x0 = np.zeros(lay.dim_x)
    for t in (0.5, 3.0, 17.0):
        ref = scipy.linalg.expm(a * t) @ (x0 + shift) - shift
        assert np.max(np.abs(res.sol(t) - ref)) < 1e-9


def test_affine_flow_preserves_convex_combinations():
    lay, fs, mat = bichromatic_pi()
    rng = np.random.default_rng(3)
    rho_a = np.diag(rng.dirichlet(np.ones(lay.n_j))).astype(complex)
    rho_b = np.eye(lay.n_j, dtype=complex) / lay.n_j
    xa, xb = pack(rho_a, lay), pack(rho_b, lay)
    alpha = 0.37
    sa = integrate(fs, mat, 5.0, x0=xa)
    sb = integrate(fs, mat, 5.0, x0=xb)
    sc = integrate(fs, mat, 5.0, x0=alpha * xa + (1 - alpha) * xb)
    for t in (1.0, 5.0):
        mix = alpha * sa.sol(t) + (1 - alpha) * sb.sol(t)
        assert np.max(np.abs(sc.sol(t) - mix)) < 1e-9


def test_state_stays_physical_along_transient():
    lay, fs, mat = bichromatic_pi()
    res = integrate(fs, mat, 50.0)
    for t in np.linspace(0.0, 50.0, 26):
        rho = unpack(res.sol(t), lay)
        assert abs(np.trace(rho) - 1) < 1e-12
        assert np.linalg.norm(rho - rho.conj().T) < 1e-12
        assert np.linalg.eigvalsh(rho).min() > -1e-8


def test_settled_harmonics_match_solver(settled_bichromatic):
    lay, fs, mat, settled, sol = settled_bichromatic
    co = fourier_extract(settled.sol, settled.period, 6, t0=settled.t0)
    for n in range(-6, 7):
        ref = np.concatenate([sol.x_o_at(n), sol.x_xi_at(n)])
        assert np.max(np.abs(co[n] - ref)) < 1e-8, n


def test_mean_rates_match_solver(settled_bichromatic):
    lay, fs, mat, settled, sol = settled_bichromatic
    rb = mean_rates(settled)
    assert np.max(np.abs(rb - sol.rbar)) < 1e-9


def test_rate_timeseries_matches_solver(settled_bichromatic):
    lay, fs, mat, settled, sol = settled_bichromatic
    ts = settled.t0 + settled.period * np.arange(9) / 9
    series = rate_timeseries(fs, lay, settled.sol, ts)
    for j in range(fs.n_waves):
        ref = np.array([sol.rate_at(j, t) for t in ts])
        assert np.max(np.abs(series[j] - ref)) < 1e-6


def test_monodromy_two_level_band():
    lay = build_layout(AtomicTransition(0, 0, two_level_override=True))
    fs = FieldSet.build([PlaneWave(rabi=1.2, detuning=0.7)])
    mat = ObeMatrices.build(lay, fs.deltabar)
    spec = monodromy(fs, mat)
    assert spec.lambda_max <= 1e-8
    assert np.all(spec.exponents.real >= -1.0 - 1e-9)
    assert np.all(spec.exponents.real <= -0.5 + 1e-9)
    # constant generator: multipliers are the eigenvalues of e^(AT)
    a = assemble_A(mat, fs.omega_q(0.0))
    ref = np.linalg.eigvals(scipy.linalg.expm(a * spec.period))
    assert np.allclose(np.sort_complex(spec.multipliers), np.sort_complex(ref), atol=1e-9)


def test_monodromy_dark_state_marginal():
    lay = build_layout(AtomicTransition(1, 0))
    fs = FieldSet.build([PlaneWave(rabi=1.0, detuning=0.3, pol="pi")])
    mat = ObeMatrices.build(lay, fs.deltabar)
    spec = monodromy(fs, mat)
    assert abs(spec.lambda_max) < 1e-9


def test_monodromy_bichromatic_contracting(settled_bichromatic):
    lay, fs, mat, _, _ = settled_bichromatic
    spec = monodromy(fs, mat)
    assert spec.lambda_max < -1e-3
    assert spec.lambda_max <= 1e-8


def test_fourier_extract_rejects_transient():
    lay, fs, mat = bichromatic_pi()
    res = integrate(fs, mat, 2.0 * fs.period)
    with pytest.raises(PeriodMismatch):
        fourier_extract(res.sol, fs.period, 2, t0=0.0)


def test_settle_gives_up_within_budget():
    lay = build_layout(AtomicTransition(1, 2))
    waves = [
        PlaneWave(rabi=1.5, detuning=3.0, k_dir=(1, 0, 0), pol="sigma+"),
        PlaneWave(rabi=2.2, detuning=-3.0, k_dir=(-1, 0, 0),
                  pol=(0.5 ** 0.5, 0, 0.5 ** 0.5)),
    ]
    fs = FieldSet.build(waves)
    mat = ObeMatrices.build(lay, fs.deltabar)
    with pytest.raises(PeriodMismatch):
        settle_to_periodic(fs, mat, settle_tol=1e-12, t_max=30.0)
