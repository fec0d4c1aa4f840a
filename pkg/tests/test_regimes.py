"""Closed-form regimes checked against the general solver on their domains."""

import numpy as np
import pytest

from obeforce.errors import (
    DegenerateRegime,
    DepthNotConverged,
    UnsupportedTransition,
)
from obeforce.field_config import FieldSet, PlaneWave, elliptical_pol
from obeforce.floquet_solver import solve_periodic
from obeforce.obe_matrices import ObeMatrices
from obeforce.regimes import (
    common_pure_polarization,
    gao_params,
    incoherent_sigma_pm,
    low_intensity_check,
    low_intensity_rate,
    n2_continued_fraction,
    pure_polarization_reduced,
    same_frequency_rate,
)
from obeforce.state_layout import AtomicTransition, build_layout

XHAT = (1.0, 0.0, 0.0)
ZHAT = (0.0, 0.0, 1.0)


def setup(j_g, j_e, waves, kappa=None, two_level=False):
    fieldset = FieldSet.build(waves, kappa)
    tr = AtomicTransition(j_g, j_e, two_level_override=two_level)
    return fieldset, ObeMatrices.build(build_layout(tr), fieldset.deltabar)


def rabi_for_saturation(s, detuning):
    return np.sqrt(2.0 * s * (0.25 + detuning**2))


# -- two-parameter rate law --------------------------------------------------

@pytest.mark.parametrize("j_g, j_e, q, want_b", [
    (0.5, 1.5, 0, 1.5),
    (1, 2, 0, 1.7),
    (0.5, 0.5, 0, 3.0),
    (1.5, 1.5, 0, 25.0 / 3.0),
])
def test_rate_law_known_coefficients(j_g, j_e, q, want_b):
    params = gao_params(AtomicTransition(j_g, j_e), q)
    assert params.a == 1.0
    assert params.b == pytest.approx(want_b, abs=1e-12)


@pytest.mark.parametrize("j_g", [0.5, 1, 1.5, 2])
@pytest.mark.parametrize("q", [1, -1])
def test_rate_law_circular_drive_is_two_level_like(j_g, q):
    params = gao_params(AtomicTransition(j_g, j_g + 1), q)
    assert params.b == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("j_g, q", [(1, 0), (2, 0), (1, 1), (1.5, 1)])
def test_rate_law_vanishes_with_dark_states(j_g, q):
    params = gao_params(AtomicTransition(j_g, j_g), q)
    assert params.a == 0.0 and params.b == 0.0


def test_rate_law_rejects_lowering_transitions():
    with pytest.raises(UnsupportedTransition):
        gao_params(AtomicTransition(1, 0), 0)
    with pytest.raises(UnsupportedTransition):
        gao_params(AtomicTransition(1.5, 0.5), 1)


@pytest.mark.parametrize("j_g, j_e, q", [
    (0.5, 1.5, 0), (1, 2, 0), (0.5, 0.5, 0), (1.5, 1.5, 0), (1, 2, 1),
])
def test_rate_law_matches_stationary_solver(j_g, j_e, q):
    pol = {1: "sigma+", 0: "pi", -1: "sigma-"}[q]
    params = gao_params(AtomicTransition(j_g, j_e), q)
    detuning = 0.3
    for s in (0.05, 0.5, 5.0, 50.0):
        waves = [PlaneWave(rabi_for_saturation(s, detuning), detuning, ZHAT, 1.0, pol)]
        fieldset, matrices = setup(j_g, j_e, waves)
        rate = same_frequency_rate(fieldset, matrices)[0]
        want = 0.5 * s * params.a / (params.b + s)
        assert rate == pytest.approx(want, rel=1e-9)


def test_dark_state_pumping_rate_is_zero():
    waves = [PlaneWave(0.8, 0.3, ZHAT, 1.0, "sigma+")]
    fieldset, matrices = setup(1, 1, waves)
    assert abs(same_frequency_rate(fieldset, matrices)[0]) < 1e-12


# -- low intensity -----------------------------------------------------------

def test_low_intensity_check_accepts_weak_drive():
    waves = [PlaneWave(0.01, 3.0, XHAT, 1.0, "pi"),
             PlaneWave(0.02, -2.0, XHAT, 1.0, "sigma+")]
    fieldset, matrices = setup(0.5, 1.5, waves)
    ok, info = low_intensity_check(fieldset, matrices)
    assert ok
    assert info["rabi_sum"] == pytest.approx(0.03)
    assert info["probed_harmonics"] > 0


def test_low_intensity_check_rejects_strong_drive():
    waves = [PlaneWave(3.0, 3.0, XHAT, 1.0, "pi"),
             PlaneWave(0.01, -2.0, XHAT, 1.0, "pi")]
    fieldset, matrices = setup(0.5, 1.5, waves)
    ok, info = low_intensity_check(fieldset, matrices)
    assert not ok
    assert info["rabi_sum"] > info["rabi_limit"]


def test_low_intensity_check_sees_slow_harmonic_mixing():
    # weak amplitudes, but a tiny beat frequency lets the undamped ground
    # Zeeman coherences resonate and the row-sum condition must trip
    waves = [PlaneWave(0.03, 0.005, XHAT, 1.0, "sigma+"),
             PlaneWave(0.03, -0.005, XHAT, 1.0, "sigma-")]
    fieldset, matrices = setup(0.5, 1.5, waves)
    ok, info = low_intensity_check(fieldset, matrices)
    assert not ok
    assert info["rabi_sum"] < info["rabi_limit"]
    assert info["max_row_sum"] > info["row_sum_limit"]


def test_low_intensity_rate_exact_for_two_level():
    for s in (0.04, 1.0, 6.0):
        waves = [PlaneWave(rabi_for_saturation(s, 1.1), 1.1, ZHAT, 1.0, "pi")]
        fieldset, matrices = setup(0, 0, waves, two_level=True)
        rate = low_intensity_rate(fieldset, matrices, 0)
        assert rate == pytest.approx(0.5 * s / (1.0 + s), rel=1e-12)


def test_low_intensity_rate_matches_solver_when_weak():
    waves = [PlaneWave(0.04, 3.0, XHAT, 1.0, "pi"),
             PlaneWave(0.05, -2.0, XHAT, 1.0, "sigma+")]
    fieldset, matrices = setup(0.5, 1.5, waves)
    ok, _ = low_intensity_check(fieldset, matrices)
    assert ok
    sol = solve_periodic(fieldset, matrices)
    for j in range(2):
        approx = low_intensity_rate(fieldset, matrices, j)
        assert approx == pytest.approx(sol.rbar[j], rel=1e-2)


def test_low_intensity_rate_needs_distinct_frequencies():
    waves = [PlaneWave(0.02, 1.0, XHAT, 1.0, "sigma+"),
             PlaneWave(0.02, 1.0, XHAT, 1.0, "sigma-")]
    fieldset, matrices = setup(0.5, 1.5, waves)
    with pytest.raises(ValueError, match="distinct"):
        low_intensity_rate(fieldset, matrices, 0)


# -- incoherent circular pair ------------------------------------------------

def test_incoherent_pair_matches_phase_averaged_solver():
    # J_g = 1/2 carries no ground coherence the pair could pump, so the
    # fixed-phase mixture reproduces the incoherent limit to O(s)
    amps = (0.03125, 0.04375)
    detuning = 0.7

    def rates_at_phase(phi):
        waves = [PlaneWave(amps[0], detuning, XHAT, 1.0, "sigma+"),
                 PlaneWave(amps[1] * np.exp(1j * phi), detuning, XHAT, 1.0, "sigma-")]
        fieldset, matrices = setup(0.5, 1.5, waves)
        return same_frequency_rate(fieldset, matrices)

    grid = np.linspace(0.0, 2.0 * np.pi, 32, endpoint=False)
    averaged = np.mean([rates_at_phase(phi) for phi in grid], axis=0)

    waves = [PlaneWave(amps[0], detuning, XHAT, 1.0, "sigma+"),
             PlaneWave(amps[1], detuning, XHAT, 1.0, "sigma-")]
    fieldset, matrices = setup(0.5, 1.5, waves)
    got = incoherent_sigma_pm(fieldset, matrices)
    assert np.max(np.abs(got / averaged - 1.0)) < 1e-3


def test_incoherent_pair_matches_beating_drive():
    # with larger J_g the phases must actually drift: the beat washes out
    # the undamped ground coherences that a fixed phase would sustain
    waves = [PlaneWave(0.03125, 0.5, XHAT, 1.0, "sigma+"),
             PlaneWave(0.04375, -0.5, XHAT, 1.0, "sigma-")]
    fieldset, matrices = setup(1, 2, waves)
    sol = solve_periodic(fieldset, matrices)
    got = incoherent_sigma_pm(fieldset, matrices)
    assert np.max(np.abs(got / sol.rbar - 1.0)) < 1e-3


def test_incoherent_pair_symmetric_amplitudes_give_equal_rates():
    waves = [PlaneWave(0.05, 0.4, XHAT, 1.0, "sigma+"),
             PlaneWave(0.05, 0.4, XHAT, 1.0, "sigma-")]
    fieldset, matrices = setup(1, 2, waves)
    rates = incoherent_sigma_pm(fieldset, matrices)
    assert rates[0] == pytest.approx(rates[1], rel=1e-12)


def test_incoherent_pair_validates_configuration():
    waves = [PlaneWave(0.05, 0.4, XHAT, 1.0, "sigma+"),
             PlaneWave(0.05, 0.4, XHAT, 1.0, "pi")]
    fieldset, matrices = setup(1, 2, waves)
    with pytest.raises(ValueError, match="sigma"):
        incoherent_sigma_pm(fieldset, matrices)
    waves = [PlaneWave(0.05, 0.4, XHAT, 1.0, elliptical_pol(1.0, 0.3)),
             PlaneWave(0.05, 0.4, XHAT, 1.0, "sigma-")]
    fieldset, matrices = setup(1, 2, waves)
    with pytest.raises(ValueError, match="pure"):
        incoherent_sigma_pm(fieldset, matrices)


# -- shared frequency --------------------------------------------------------

def test_same_frequency_matches_general_solver():
    waves = [PlaneWave(1.3, 1.2, XHAT, 1.0, elliptical_pol(0.9, 0.4)),
             PlaneWave(0.7 * np.exp(0.3j), 1.2, ZHAT, 1.0, "pi")]
    fieldset, matrices = setup(1, 2, waves, kappa=(0.3, 0.7))
    rates = same_frequency_rate(fieldset, matrices)
    sol = solve_periodic(fieldset, matrices)
    for j in range(2):
        assert rates[j] == pytest.approx(sol.rbar[j], abs=1e-12)


def test_same_frequency_rate_depends_only_on_saturation():
    pol = elliptical_pol(1.1, 0.7)
    base = None
    for detuning in (0.0, 1.0, -1.0, 10.0, -10.0):
        waves = [PlaneWave(rabi_for_saturation(0.8, detuning), detuning,
                           ZHAT, 1.0, pol)]
        fieldset, matrices = setup(1, 2, waves)
        rate = same_frequency_rate(fieldset, matrices)[0]
        if base is None:
            base = rate
        else:
            assert rate == pytest.approx(base, abs=1e-10)


def test_same_frequency_split_wave_keeps_total_rate():
    pol = elliptical_pol(0.6, 1.9)
    waves = [PlaneWave(0.9, 0.8, XHAT, 1.0, pol),
             PlaneWave(0.6, 0.8, XHAT, 1.0, pol)]
    fieldset, matrices = setup(1, 1, waves)
    split = same_frequency_rate(fieldset, matrices)
    merged_waves = [PlaneWave(1.5, 0.8, XHAT, 1.0, pol)]
    fieldset, matrices = setup(1, 1, merged_waves)
    merged = same_frequency_rate(fieldset, matrices)[0]
    assert split.sum() == pytest.approx(merged, rel=1e-12)


def test_same_frequency_rejects_beating_drive():
    waves = [PlaneWave(0.5, 1.0, XHAT, 1.0, "pi"),
             PlaneWave(0.5, -1.0, XHAT, 1.0, "pi")]
    fieldset, matrices = setup(0.5, 1.5, waves)
    with pytest.raises(ValueError, match="frequency"):
        same_frequency_rate(fieldset, matrices)


def test_degenerate_steady_state_is_reported():
    waves = [PlaneWave(0.8, 0.0, ZHAT, 1.0, "pi")]
    fieldset, matrices = setup(1, 0, waves)
    with pytest.raises(DegenerateRegime):
        same_frequency_rate(fieldset, matrices)


# -- common pure polarization ------------------------------------------------

def test_common_pure_polarization_detection():
    w = [PlaneWave(1.0, 2.0, XHAT, 1.0, "sigma-"),
         PlaneWave(1.0, -2.0, XHAT, 1.0, "sigma-")]
    assert common_pure_polarization(FieldSet.build(w)) == -1
    w[1] = PlaneWave(1.0, -2.0, XHAT, 1.0, "pi")
    assert common_pure_polarization(FieldSet.build(w)) is None
    w[1] = PlaneWave(1.0, -2.0, XHAT, 1.0, elliptical_pol(1.0, 0.0))
    assert common_pure_polarization(FieldSet.build(w)) is None


def bichromatic_pi(j_g, j_e):
    waves = [PlaneWave(2.0, 4.0, XHAT, 1.0, "pi"),
             PlaneWave(2.0 * np.exp(0.7j), -4.0, (-1.0, 0.0, 0.0), 1.0, "pi")]
    return setup(j_g, j_e, waves)


def test_population_reduction_matches_full_solver():
    fieldset, matrices = bichromatic_pi(0.5, 1.5)
    full = solve_periodic(fieldset, matrices)
    reduced = pure_polarization_reduced(fieldset, matrices)
    assert reduced.blocks.view.dim == matrices.layout.dim_p
    for j in range(2):
        assert reduced.rbar[j] == pytest.approx(full.rbar[j], abs=1e-10)
    for n, vec in reduced.x_xi.items():
        assert np.max(np.abs(vec[matrices.layout.dim_p:])) == 0.0
        assert np.max(np.abs(vec - full.x_xi_at(n))) < 1e-9


def test_population_reduction_rejects_mixed_polarizations():
    waves = [PlaneWave(1.0, 2.0, XHAT, 1.0, "pi"),
             PlaneWave(1.0, -2.0, XHAT, 1.0, "sigma+")]
    fieldset, matrices = setup(0.5, 1.5, waves)
    with pytest.raises(ValueError, match="pure"):
        pure_polarization_reduced(fieldset, matrices)


# -- two-wave continued fraction ---------------------------------------------

def test_continued_fraction_action_matches_solver_harmonics():
    fieldset, matrices = bichromatic_pi(0.5, 1.5)
    sol = solve_periodic(fieldset, matrices)
    cf = n2_continued_fraction(fieldset, matrices)
    assert cf.n_s == 2
    x0 = sol.x_xi[0]
    scale = np.linalg.norm(x0)
    for k, q_k in enumerate(cf.higher_q, start=1):
        want = sol.x_xi_at(k * cf.n_s)
        assert np.max(np.abs(q_k @ x0 - want)) < 1e-8 * scale


def test_continued_fraction_two_level_matches_recipe_map():
    waves = [PlaneWave(1.1, 3.0, XHAT, 1.0, "pi"),
             PlaneWave(0.8, -3.0, XHAT, 1.0, "pi")]
    fieldset, matrices = setup(0, 0, waves, two_level=True)
    sol = solve_periodic(fieldset, matrices)
    cf = n2_continued_fraction(fieldset, matrices)
    # the state space is one-dimensional, so the harmonic maps are unique
    assert cf.q_ns.shape == (1, 1)
    assert cf.q_ns[0, 0] == pytest.approx(sol.q_by_n[cf.n_s][0, 0], rel=1e-8)


def test_continued_fraction_depth_cap_raises():
    waves = [PlaneWave(8.0, 0.5, XHAT, 1.0, "pi"),
             PlaneWave(8.0, -0.5, XHAT, 1.0, "pi")]
    fieldset, matrices = setup(0.5, 1.5, waves)
    with pytest.raises(DepthNotConverged):
        n2_continued_fraction(fieldset, matrices, depth_init=2, depth_cap=4)


def test_continued_fraction_needs_two_waves():
    waves = [PlaneWave(1.0, 2.0, XHAT, 1.0, "pi")]
    fieldset, matrices = setup(0.5, 1.5, waves)
    with pytest.raises(ValueError, match="two waves"):
        n2_continued_fraction(fieldset, matrices)
