import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from sonohbt import (
    C_NM_PER_FS,
    DomainError,
    ExponentialSpectrum,
    FilterSpec,
    GaussianSource,
    HBAR_C_EV_NM,
    UnsupportedConfigurationError,
    averaged_correlator,
    averaged_transverse_scan,
    effective_intercept,
    filter_product_identity_check,
    fit_scan,
    intercept_curve,
    pair_acceptance,
    photon_wavelength_nm,
)
from sonohbt.filters import FWHM_OVER_RMS, delta_omega_for_dlambda

EXP1 = ExponentialSpectrum(1.0)
LAMBDA_3EV = photon_wavelength_nm(3.0)  # 413.2807 nm


def test_wavelength_energy_roundtrip():
    from sonohbt import photon_energy_ev

    for lam in (210.0, 413.28, 830.0):
        assert photon_wavelength_nm(photon_energy_ev(lam)) == pytest.approx(
            lam, rel=1e-12
        )


def test_filterspec_from_wavelength():
    f = FilterSpec.from_wavelength(413.28, 1.0)
    assert f.width == pytest.approx(7.2590e-3, abs=2e-7)
    assert f.center == pytest.approx(3.0, abs=1e-2)
    g = FilterSpec.from_wavelength(413.28, 1.0, convention="fwhm")
    assert g.width == pytest.approx(f.width / FWHM_OVER_RMS, rel=1e-12)


def test_filterspec_validation():
    with pytest.raises(DomainError):
        FilterSpec(center=3.0, width=0.0)
    with pytest.raises(DomainError):
        FilterSpec(center=3.0, width=0.5)  # outside narrow-band regime


def test_product_identity_peaks_at_filter_centers():
    f_a = FilterSpec(center=3.0, width=0.01)
    f_b = FilterSpec(center=2.98, width=0.01)
    lhs, rhs = filter_product_identity_check(f_a, f_b, 3.0, 2.98)
    assert lhs == pytest.approx(rhs, rel=1e-12)
    # both sides maximal at the centers
    off = filter_product_identity_check(f_a, f_b, 3.005, 2.98)
    assert off[0] < lhs and off[1] < rhs


def test_product_identity_ratio_constant_over_random_points():
    f_a = FilterSpec(center=3.0, width=0.007)
    f_b = FilterSpec(center=2.99, width=0.007)
    rng = np.random.default_rng(5)
    ratios = []
    for _ in range(1000):
        w1 = 3.0 + 0.02 * rng.standard_normal()
        w2 = 2.99 + 0.02 * rng.standard_normal()
        lhs, rhs = filter_product_identity_check(f_a, f_b, w1, w2)
        ratios.append(lhs / rhs)
    ratios = np.asarray(ratios)
    assert ratios.max() - ratios.min() <= 1e-12


def test_product_identity_requires_equal_widths():
    f_a = FilterSpec(center=3.0, width=0.007)
    f_b = FilterSpec(center=3.0, width=0.007 + 1e-9)
    with pytest.raises(UnsupportedConfigurationError):
        filter_product_identity_check(f_a, f_b, 3.0, 3.0)


def test_effective_intercept_limits_and_knee():
    assert effective_intercept(0.0, 1e6) == 1.5
    dw = delta_omega_for_dlambda(413.28, 1.0)
    r_knee = HBAR_C_EV_NM / dw
    assert effective_intercept(dw, r_knee) == pytest.approx(
        1.0 + 0.5 / math.sqrt(5.0), rel=1e-12
    )
    assert effective_intercept(dw, r_knee) == pytest.approx(1.223607, abs=1e-6)
    # 1 ps flash with a 1 nm band width at 413.28 nm
    val = effective_intercept(dw, C_NM_PER_FS * 1000.0)
    assert val == pytest.approx(1.02264, abs=2e-5)


@given(
    dw=st.floats(min_value=1e-5, max_value=0.05),
    rp=st.floats(min_value=1.0, max_value=1e6),
)
@settings(max_examples=100)
def test_effective_intercept_decreasing_and_bounded(dw, rp):
    assume(dw * rp / HBAR_C_EV_NM > 1e-4)  # dilution above the precision floor
    v = effective_intercept(dw, rp)
    assert 1.0 < v <= 1.5
    assert effective_intercept(dw * 1.01, rp) < v
    assert effective_intercept(dw, rp * 1.01) < v


def test_averaged_correlator_matches_intercept_formula():
    src = GaussianSource(sigma_r=500.0, delta_tau=1000.0)
    f = FilterSpec.from_wavelength(413.28, 1.0)
    r_par = math.sqrt(500.0**2 + (C_NM_PER_FS * 1000.0) ** 2)
    p = averaged_correlator(src, EXP1, f, f, 0.0)
    assert p.value == pytest.approx(effective_intercept(f.width, r_par), abs=1e-3)


def test_averaged_correlator_delta_filter_recovers_unfiltered():
    src = GaussianSource(sigma_r=500.0, delta_tau=1000.0)
    f = FilterSpec.from_wavelength(413.28, 1e-4)
    phi = 0.2
    p = averaged_correlator(src, EXP1, f, f, phi)
    xi = 2.0 * f.center * math.sin(0.5 * phi)
    unfiltered = 1.0 + 0.5 * math.exp(-((xi * 500.0 / HBAR_C_EV_NM) ** 2))
    assert p.value == pytest.approx(unfiltered, abs=1e-4)


def test_smoothness_approximation_negligible_for_narrow_filters():
    src = GaussianSource(sigma_r=500.0, delta_tau=1000.0)
    f = FilterSpec.from_wavelength(413.28, 1.0)
    on = averaged_correlator(src, EXP1, f, f, 0.0, smoothness=True)
    off = averaged_correlator(src, EXP1, f, f, 0.0, smoothness=False)
    assert abs(on.value - off.value) <= 1e-3 * off.value


def test_averaging_only_dilutes():
    src = GaussianSource(sigma_r=500.0, delta_tau=1000.0)
    f = FilterSpec.from_wavelength(413.28, 1.0)
    for phi in (0.0, 0.05, 0.1, 0.2, 0.3):
        p = averaged_correlator(src, EXP1, f, f, phi)
        xi = 2.0 * f.center * math.sin(0.5 * phi)
        unfiltered = 1.0 + 0.5 * math.exp(-((xi * 500.0 / HBAR_C_EV_NM) ** 2))
        assert p.value <= unfiltered + 1e-6


def test_filter_support_must_fit_spectrum_domain():
    from sonohbt import TabulatedSpectrum

    grid = np.linspace(2.99, 3.01, 30)
    tab = TabulatedSpectrum(grid, np.exp(-grid))
    src = GaussianSource(sigma_r=500.0, delta_tau=0.0)
    f = FilterSpec(center=3.0, width=0.005)  # 5 sigma = 0.025 exits [2.99, 3.01]
    with pytest.raises(DomainError):
        averaged_correlator(src, tab, f, f, 0.0)


def test_fit_of_averaged_scan_sees_dilution_only_in_intercept():
    src = GaussianSource(sigma_r=500.0, delta_tau=1000.0)
    f = FilterSpec.from_wavelength(413.28, 1.0)
    sc = averaged_transverse_scan(src, EXP1, f, np.linspace(0.0, 1.2, 15))
    fit = fit_scan(sc)
    r_par = math.sqrt(500.0**2 + (C_NM_PER_FS * 1000.0) ** 2)
    assert fit.intercept == pytest.approx(
        effective_intercept(f.width, r_par), abs=1e-3
    )
    assert fit.radius == pytest.approx(500.0, rel=1e-3)


def test_intercept_curve_knee_and_asymptotes():
    dtau = np.geomspace(1.0, 1e5, 120)
    curve = intercept_curve(1.0, 413.28, dtau * C_NM_PER_FS)
    assert curve.knee_dtau_fs == pytest.approx(90.675, abs=0.01)
    # matches the 88 fs anchor within 5% (rms width convention)
    assert abs(curve.knee_dtau_fs - 88.0) / 88.0 < 0.05
    # short-pulse asymptote: full-strength intercept
    assert curve.intercept[0] == pytest.approx(1.5, abs=1e-3)
    # long-pulse asymptote: C(0) - 1 ~ 1/dtau (log-log slope -1)
    sel = curve.dtau_fs >= 10.0 * curve.knee_dtau_fs
    slope = np.polyfit(np.log(curve.dtau_fs[sel]), np.log(curve.intercept[sel] - 1.0), 1)[0]
    assert slope == pytest.approx(-1.0, abs=0.01)


def test_intercept_curve_zero_width_is_flat():
    curve = intercept_curve(0.0, 413.28, np.geomspace(1.0, 1e4, 20) * C_NM_PER_FS)
    assert np.all(curve.intercept == 1.5)
    assert math.isinf(curve.knee_dtau_fs)


def test_intercept_curve_knee_scales_inversely_with_band_width():
    c1 = intercept_curve(1.0, 413.28, np.array([1000.0]))
    c10 = intercept_curve(10.0, 413.28, np.array([1000.0]))
    assert c10.knee_dtau_fs == pytest.approx(c1.knee_dtau_fs / 10.0, rel=1e-12)


def test_pair_acceptance_scales_quadratically_in_band_width():
    flat = ExponentialSpectrum(1e6)  # effectively flat across the passband
    f1 = FilterSpec.from_wavelength(413.28, 0.5)
    f2 = FilterSpec.from_wavelength(413.28, 1.0)
    a1 = pair_acceptance(f1, f1, flat)
    a2 = pair_acceptance(f2, f2, flat)
    assert a2 / a1 == pytest.approx(4.0, rel=1e-3)
