import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sonohbt import (
    C_NM_PER_FS,
    DEFAULT_WINDOW,
    DomainError,
    ExponentialSpectrum,
    FlowBoost,
    GaussianSource,
    HBAR_C_EV_NM,
    HbtRadii,
    NO_FLOW,
    PairKinematics,
    correction_terms,
    gaussian_correlator,
    mc_correlator,
    numeric_correlator,
    scan,
    scan_from_csv,
    scan_to_csv,
)
from sonohbt.correlator import pair_for_scan_point

EXP1 = ExponentialSpectrum(1.0)
XI_MAX_3EV = 6.0 * math.sqrt(3.0)


def kin_transverse(e, xi):
    return PairKinematics(e=e, q0=0.0, q_perp=xi, q_par=0.0, phi=2 * math.atan(xi / (2 * e)))


def kin_longitudinal(e, q0):
    return PairKinematics(e=e, q0=q0, q_perp=0.0, q_par=abs(q0), phi=0.0)


def test_chaotic_intercept_at_zero_momentum():
    radii = HbtRadii.from_radii(r_perp_nm=100.0, r_par_nm=100.0)
    p = gaussian_correlator(radii, kin_transverse(3.0, 0.0))
    assert p.value == 1.5


def test_small_source_at_window_edge():
    # 10 nm transverse radius: C - 1 drops by ~24% at the accessible edge
    radii = HbtRadii.from_radii(r_perp_nm=10.0)
    p = gaussian_correlator(radii, kin_transverse(3.0, XI_MAX_3EV))
    assert p.value == pytest.approx(1.3788891327078345, rel=1e-12)
    drop = 1.0 - (p.value - 1.0) / 0.5
    assert drop == pytest.approx(0.2422, abs=5e-4)


def test_picosecond_pulse_longitudinal_scale():
    r_par = C_NM_PER_FS * 1000.0  # c * 1 ps
    radii = HbtRadii.from_radii(r_par_nm=r_par)
    q0_e = HBAR_C_EV_NM / r_par  # exponent is exactly 1 here
    assert q0_e == pytest.approx(0.65821e-3, abs=1e-7)
    p = gaussian_correlator(radii, kin_longitudinal(3.0, q0_e))
    assert p.value == pytest.approx(1.0 + 0.5 / math.e, rel=1e-12)


def test_lambda_max_override():
    radii = HbtRadii.from_radii(r_perp_nm=100.0)
    p = gaussian_correlator(radii, kin_transverse(3.0, 0.0), lambda_max=1.0)
    assert p.value == 2.0


@given(
    xi=st.floats(min_value=0.0, max_value=10.0),
    q0=st.floats(min_value=0.0, max_value=1.0),
    rp=st.floats(min_value=1.0, max_value=3000.0),
)
@settings(max_examples=100)
def test_correlator_bounds_and_monotone_decrease(xi, q0, rp):
    radii = HbtRadii.from_radii(r_perp_nm=rp, r_par_nm=2 * rp)
    kin = PairKinematics(e=3.0, q0=q0, q_perp=xi, q_par=q0, phi=0.0 if xi == 0 else 0.3)
    val = gaussian_correlator(radii, kin).value
    assert 1.0 <= val <= 1.5
    kin2 = PairKinematics(
        e=3.0, q0=1.1 * q0, q_perp=1.1 * xi, q_par=1.1 * q0, phi=kin.phi
    )
    assert gaussian_correlator(radii, kin2).value <= val + 1e-15


def test_quadrature_matches_analytic_transverse():
    src = GaussianSource(sigma_r=100.0, delta_tau=0.0)
    grid = np.linspace(0.0, XI_MAX_3EV, 20)
    sq = scan("transverse", 3.0, grid, source=src, spectrum=EXP1, engine="quadrature")
    sa = scan("transverse", 3.0, grid, source=src, spectrum=EXP1, engine="analytic")
    assert np.max(np.abs(sq.values - sa.values)) <= 1e-6


def test_quadrature_matches_analytic_longitudinal():
    src = GaussianSource(sigma_r=500.0, delta_tau=1000.0)
    grid = np.linspace(0.0, 3e-3, 20)
    sq = scan("longitudinal", 3.0, grid, source=src, spectrum=EXP1, engine="quadrature")
    sa = scan("longitudinal", 3.0, grid, source=src, spectrum=EXP1, engine="analytic")
    assert np.max(np.abs(sq.values - sa.values)) <= 1e-6


def test_exact_energy_mode_matches_spectral_ratio_reference():
    src = GaussianSource(sigma_r=100.0, delta_tau=0.0)
    grid = np.linspace(0.0, 6.0, 20)
    se = scan(
        "transverse", 3.0, grid, source=src, spectrum=EXP1, engine="quadrature",
        mode="exact_energies",
    )
    for xi, got in zip(grid, se.values):
        k0 = math.sqrt(9.0 + xi**2 / 4.0)  # equal-energy photon energy
        ratio = math.exp(2.0 * (k0 - 3.0))  # s(E)^2 / s(w_a) s(w_b), T = 1
        want = 1.0 + 0.5 * ratio * math.exp(-((xi * 100.0 / HBAR_C_EV_NM) ** 2))
        assert got == pytest.approx(want, abs=1e-6)


def test_identical_photons_give_full_intercept_both_modes():
    src = GaussianSource(sigma_r=300.0, delta_tau=200.0)
    ka, kb = pair_for_scan_point("transverse", 3.0, 0.0)
    for mode in ("on_shell_approx", "exact_energies"):
        p = numeric_correlator(src, EXP1, NO_FLOW, ka, kb, mode=mode)
        assert p.value == pytest.approx(1.5, abs=1e-12)


def test_mode_discrepancy_quantified_by_transverse_correction_term():
    # the on-shell vs exact-denominator gap is what the spectrum-slope
    # correction predicts (2 dR_perp^2 per unit q_perp^2 in the denominator)
    src = GaussianSource(sigma_r=100.0, delta_tau=0.0)
    xi = 2.0
    ka, kb = pair_for_scan_point("transverse", 3.0, xi)
    on = numeric_correlator(src, EXP1, NO_FLOW, ka, kb, mode="on_shell_approx").value
    ex = numeric_correlator(src, EXP1, NO_FLOW, ka, kb, mode="exact_energies").value
    d_perp, _ = correction_terms(EXP1, 3.0)
    ft = math.exp(-((xi * 100.0 / HBAR_C_EV_NM) ** 2))
    predicted = 0.5 * ft * abs(math.exp(-2.0 * d_perp * xi**2 / HBAR_C_EV_NM**2) - 1.0)
    assert abs(ex - on) == pytest.approx(predicted, rel=0.2)


def test_oscillatory_phase_safeguard_defers_to_closed_form():
    src = GaussianSource(sigma_r=3000.0, delta_tau=0.0)
    ka, kb = pair_for_scan_point("transverse", 3.0, 8.0)  # q.R/hbarc ~ 122
    p = numeric_correlator(src, EXP1, NO_FLOW, ka, kb)
    assert p.value == pytest.approx(1.0, abs=1e-12)


def test_mc_agrees_with_analytic_within_errors():
    src = GaussianSource(sigma_r=100.0, delta_tau=0.0)
    grid = np.linspace(0.0, 6.0, 7)
    mc = mc_correlator(src, EXP1, NO_FLOW, "transverse", 3.0, grid, 200_000, seed=2024)
    ana = scan("transverse", 3.0, grid, source=src, spectrum=EXP1, engine="analytic")
    within = [
        abs(m - a) <= 3.0 * max(e, 1e-12)
        for m, a, e in zip(mc.values, ana.values, mc.stat_errors)
    ]
    assert sum(within) >= 6  # >= 95% would be 6.65/7; one 3-sigma outlier allowed


def test_mc_zero_momentum_point_is_exact():
    src = GaussianSource(sigma_r=100.0, delta_tau=0.0)
    mc = mc_correlator(src, EXP1, NO_FLOW, "transverse", 3.0, [0.0, 1.0], 20_000, seed=7)
    assert mc.points[0].value == 1.5
    assert mc.points[0].stat_error == 0.0


def test_mc_error_shrinks_with_sample_size():
    src = GaussianSource(sigma_r=100.0, delta_tau=0.0)
    small = mc_correlator(src, EXP1, NO_FLOW, "transverse", 3.0, [2.0], 20_000, seed=3)
    large = mc_correlator(src, EXP1, NO_FLOW, "transverse", 3.0, [2.0], 320_000, seed=3)
    assert large.points[0].stat_error < 0.3 * small.points[0].stat_error


def test_mc_reproducible_and_worker_invariant():
    src = GaussianSource(sigma_r=100.0, delta_tau=50.0)
    grid = np.linspace(0.0, 4.0, 5)
    a = mc_correlator(src, EXP1, NO_FLOW, "transverse", 3.0, grid, 20_000, seed=99)
    b = mc_correlator(src, EXP1, NO_FLOW, "transverse", 3.0, grid, 20_000, seed=99)
    c = mc_correlator(
        src, EXP1, NO_FLOW, "transverse", 3.0, grid, 20_000, seed=99, n_workers=4
    )
    for pa, pb, pc in zip(a.points, b.points, c.points):
        assert pa.value == pb.value == pc.value
        assert pa.stat_error == pb.stat_error == pc.stat_error


def test_mc_rejects_tiny_sample():
    src = GaussianSource(sigma_r=100.0, delta_tau=0.0)
    with pytest.raises(DomainError):
        mc_correlator(src, EXP1, NO_FLOW, "transverse", 3.0, [1.0], 5000, seed=1)


def test_scan_families_reproduce_reference_curves():
    # transverse family at E = 3 eV over the accessible window
    grid = np.linspace(0.0, 10.4, 30)
    for rp in (10.0, 100.0, 1000.0, 3000.0):
        sc = scan(
            "transverse", 3.0, grid,
            radii=HbtRadii.from_radii(r_perp_nm=rp),
            window=DEFAULT_WINDOW,
        )
        want = 1.0 + 0.5 * np.exp(-((rp * sc.xi_values / HBAR_C_EV_NM) ** 2))
        np.testing.assert_allclose(sc.values, want, rtol=1e-12)
        assert sc.xi_values.max() <= XI_MAX_3EV + 1e-12
    # longitudinal family: c * {0.1, 1, 10} ps
    q0 = np.linspace(0.0, 10e-3, 30)
    for tau_ps in (0.1, 1.0, 10.0):
        rp = C_NM_PER_FS * tau_ps * 1000.0
        sc = scan("longitudinal", 3.0, q0, radii=HbtRadii.from_radii(r_par_nm=rp))
        want = 1.0 + 0.5 * np.exp(-((rp * q0 / HBAR_C_EV_NM) ** 2))
        np.testing.assert_allclose(sc.values, want, rtol=1e-12)


def test_single_point_scan():
    sc = scan("transverse", 3.0, [1.0], radii=HbtRadii.from_radii(r_perp_nm=50.0))
    assert len(sc.points) == 1


def test_scan_empty_after_window_clip_errors():
    with pytest.raises(DomainError):
        scan(
            "transverse", 3.0, [10.5, 11.0],
            radii=HbtRadii.from_radii(r_perp_nm=50.0),
            window=DEFAULT_WINDOW,
        )


def test_flow_leaves_correlator_unchanged():
    src = GaussianSource(sigma_r=500.0, delta_tau=100.0)
    flow = FlowBoost(v_over_c=1e-4, profile="linear_radial", temperature=1.0)
    grid = np.linspace(0.0, 1.2, 10)
    with_flow = scan(
        "transverse", 3.0, grid, source=src, spectrum=EXP1, flow=flow,
        engine="quadrature",
    )
    without = scan(
        "transverse", 3.0, grid, source=src, spectrum=EXP1, engine="quadrature"
    )
    assert np.max(np.abs(with_flow.values - without.values)) <= 1e-9


def test_csv_roundtrip_bit_exact(tmp_path):
    src = GaussianSource(sigma_r=100.0, delta_tau=0.0)
    grid = np.linspace(0.0, 5.0, 6)
    mc = mc_correlator(src, EXP1, NO_FLOW, "transverse", 3.0, grid, 20_000, seed=11)
    text = scan_to_csv(mc, tmp_path / "scan.csv", deterministic=True)
    again = scan_from_csv(tmp_path / "scan.csv")
    assert scan_to_csv(again, deterministic=True) == text
    np.testing.assert_array_equal(again.values, mc.values)
    np.testing.assert_array_equal(again.stat_errors, mc.stat_errors)
    np.testing.assert_array_equal(again.xi_values, mc.xi_values)


def test_longitudinal_csv_roundtrip():
    radii = HbtRadii.from_radii(r_par_nm=1000.0)
    sc = scan("longitudinal", 3.0, np.linspace(0, 0.5, 8), radii=radii)
    again = scan_from_csv(scan_to_csv(sc, deterministic=True))
    np.testing.assert_array_equal(again.abscissae, sc.abscissae)
    np.testing.assert_array_equal(again.values, sc.values)


def test_scan_validates_kind_and_monotone_grid():
    radii = HbtRadii.from_radii(r_perp_nm=10.0)
    with pytest.raises(DomainError):
        scan("sideways", 3.0, [0.0, 1.0], radii=radii)
    with pytest.raises(DomainError):
        scan("transverse", 3.0, [1.0, 0.5], radii=radii)
