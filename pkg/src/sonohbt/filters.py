"""Gaussian band-pass filter optics.

Pre-detector filters with a Gaussian frequency profile of rms width
delta_omega average the correlator over the passband. The averaging leaves
the transverse width (nearly) untouched but dilutes the intercept: the
effective intercept at q = 0 is

    C(0) = 1 + lambda / sqrt(1 + 4 delta_omega^2 R_par^2 / (hbar c)^2),

so a flash duration too long for the longitudinal scan to resolve can still
be read off the intercept of the transverse correlator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .correlator import (
    LAMBDA_MAX_CHAOTIC,
    CorrelatorPoint,
    ScanResult,
)
from .errors import DomainError, UnsupportedConfigurationError
from .kinematics import PairKinematics
from .source import GaussianSource, Spectrum
from .units import C_NM_PER_FS, HBAR_C_EV_NM, H_C_EV_NM

FWHM_OVER_RMS = 2.0 * math.sqrt(2.0 * math.log(2.0))
_NARROWBAND_LIMIT = 0.1
_SUPPORT_SIGMAS = 5.0  # Gaussian tail below 1e-6 outside +-5 sigma


@dataclass(frozen=True)
class FilterSpec:
    """Gaussian band-pass profile: center and rms width in eV.

    Quoted band widths are interpreted as the rms of the Gaussian profile;
    use convention='fwhm' in from_wavelength for FWHM-quoted filters
    (FWHM = 2 sqrt(2 ln 2) rms). The narrow-band regime width/center < 0.1
    is assumed throughout.
    """

    center: float
    width: float

    def __post_init__(self):
        if self.center <= 0:
            raise DomainError("filter center must be positive")
        if self.width <= 0:
            raise DomainError("filter width must be positive")
        if self.width / self.center >= _NARROWBAND_LIMIT:
            raise DomainError(
                f"width/center = {self.width / self.center:g} outside the "
                f"narrow-band regime (< {_NARROWBAND_LIMIT})"
            )

    @classmethod
    def from_wavelength(
        cls, lambda_nm: float, dlambda_nm: float, convention: str = "rms"
    ) -> "FilterSpec":
        """Build from a center wavelength and band width in nm:
        delta_omega = (2 pi hbar c / lambda^2) * delta_lambda."""
        if lambda_nm <= 0 or dlambda_nm <= 0:
            raise DomainError("wavelength and band width must be positive")
        center = H_C_EV_NM / lambda_nm
        width = H_C_EV_NM * dlambda_nm / lambda_nm**2
        if convention == "fwhm":
            width /= FWHM_OVER_RMS
        elif convention != "rms":
            raise DomainError(f"unknown width convention {convention!r}")
        return cls(center=center, width=width)

    def profile(self, omega):
        """Normalized Gaussian transmission density."""
        omega = np.asarray(omega, dtype=float)
        return (
            np.exp(-0.5 * ((omega - self.center) / self.width) ** 2)
            / (math.sqrt(2.0 * math.pi) * self.width)
        )


def delta_omega_for_dlambda(lambda_nm: float, dlambda_nm: float) -> float:
    """rms filter width in eV for a band width in nm at a center wavelength."""
    if lambda_nm <= 0 or dlambda_nm < 0:
        raise DomainError("need lambda > 0 and dlambda >= 0")
    return H_C_EV_NM * dlambda_nm / lambda_nm**2


def filter_product_identity_check(
    f_a: FilterSpec, f_b: FilterSpec, omega_1: float, omega_2: float
) -> tuple[float, float]:
    """Evaluate both sides of the equal-width filter product identity

    f_{wa,dw}(w1) f_{wb,dw}(w2) = f_{K0,dw'}(wbar) f_{q0,2dw'}(Dw),
    dw' = dw/sqrt(2), wbar = (w1+w2)/2, Dw = w1 - w2, K0 = (wa+wb)/2,
    q0 = wa - wb.

    Returns (lhs, rhs). Their ratio is a constant independent of
    (omega_1, omega_2) (the Jacobian of the variable change is 1, so the
    constant is in fact unity); the identity is only ever used inside ratios
    where any constant would cancel.
    """
    if abs(f_a.width - f_b.width) > 1e-15 * max(f_a.width, f_b.width):
        raise UnsupportedConfigurationError(
            "the filter product identity requires equal widths"
        )
    dw = f_a.width
    dwp = dw / math.sqrt(2.0)
    lhs = float(f_a.profile(omega_1) * f_b.profile(omega_2))
    wbar = 0.5 * (omega_1 + omega_2)
    delta = omega_1 - omega_2
    k0 = 0.5 * (f_a.center + f_b.center)
    q0 = f_a.center - f_b.center
    mean_part = math.exp(-0.5 * ((wbar - k0) / dwp) ** 2) / (
        math.sqrt(2.0 * math.pi) * dwp
    )
    diff_part = math.exp(-0.5 * ((delta - q0) / (2.0 * dwp)) ** 2) / (
        math.sqrt(2.0 * math.pi) * 2.0 * dwp
    )
    return lhs, mean_part * diff_part


def effective_intercept(
    delta_omega: float, r_par: float, lambda_max: float = LAMBDA_MAX_CHAOTIC
) -> float:
    """Band-width-diluted correlator intercept
    C(q=0) = 1 + lambda / sqrt(1 + 4 delta_omega^2 R_par^2 / (hbar c)^2)."""
    if delta_omega < 0 or r_par < 0:
        raise DomainError("delta_omega and r_par must be >= 0")
    return 1.0 + lambda_max / math.sqrt(
        1.0 + 4.0 * (delta_omega * r_par / HBAR_C_EV_NM) ** 2
    )


def _check_filter_support(f: FilterSpec, spectrum: Spectrum) -> None:
    lo = f.center - _SUPPORT_SIGMAS * f.width
    hi = f.center + _SUPPORT_SIGMAS * f.width
    if lo <= spectrum.e_min or hi >= spectrum.e_max:
        raise DomainError(
            f"filter support [{lo:g}, {hi:g}] eV exits the spectrum domain "
            f"({spectrum.e_min:g}, {spectrum.e_max:g}) eV"
        )


def averaged_correlator(
    source: GaussianSource,
    spectrum: Spectrum,
    f_a: FilterSpec,
    f_b: FilterSpec,
    phi: float,
    n_quad: int = 48,
    smoothness: bool = True,
    lambda_max: float = LAMBDA_MAX_CHAOTIC,
) -> CorrelatorPoint:
    """Correlator averaged over the two filter passbands at opening angle phi.

    Both frequency convolutions run on Gauss-Hermite grids: the pair mean
    frequency over f_{K0, dw/sqrt(2)} and the frequency difference over
    f_{q0, sqrt(2) dw}. The space-time double integral is done in closed form
    for the Gaussian profile; its joint (wbar, Dw) suppression factor is
    exp(-[4 wbar^2 sin^2(phi/2) sigma_r^2
          + Dw^2 (c^2 dtau^2 + cos^2(phi/2) sigma_r^2)] / (hbar c)^2).

    smoothness selects the approximate denominator (spectrum constant across
    the passband, single integral of s^2) versus the full double integral of
    s(wbar + Dw/2) s(wbar - Dw/2).
    """
    if abs(f_a.width - f_b.width) > 1e-15 * max(f_a.width, f_b.width):
        raise UnsupportedConfigurationError("averaging requires equal filter widths")
    if not (0.0 <= phi < math.pi):
        raise DomainError("opening angle must lie in [0, pi)")
    _check_filter_support(f_a, spectrum)
    _check_filter_support(f_b, spectrum)

    dw = f_a.width
    dwp = dw / math.sqrt(2.0)
    k0 = 0.5 * (f_a.center + f_b.center)
    q0 = f_a.center - f_b.center

    u, w = np.polynomial.hermite.hermgauss(n_quad)
    wnorm = w / math.sqrt(math.pi)

    sin2 = math.sin(0.5 * phi) ** 2
    cos2 = math.cos(0.5 * phi) ** 2
    sig2 = source.sigma_r**2
    rpar_geo_sq = (C_NM_PER_FS * source.delta_tau) ** 2 + cos2 * sig2
    beta_mean = 4.0 * sin2 * sig2 / HBAR_C_EV_NM**2      # [1/eV^2], wbar factor
    beta_diff = rpar_geo_sq / HBAR_C_EV_NM**2            # [1/eV^2], Dw factor

    def narrow_gauss_average(mean, sdev, beta, extra=None):
        """int N(mean, sdev^2)(x) exp(-beta x^2) extra(x) dx by Gauss-Hermite
        with nodes on the product Gaussian, so a source factor much narrower
        than the filter is still resolved. The true integrand is evaluated;
        only the node placement uses the known Gaussian scales. The filter
        support is truncated at +-5 widths (tail below 1e-6), which also keeps
        spectrum evaluations inside their declared domain."""
        prec = 1.0 / sdev**2 + 2.0 * beta
        mu = (mean / sdev**2) / prec
        sstar = 1.0 / math.sqrt(prec)
        x = mu + math.sqrt(2.0) * sstar * u
        keep = np.abs(x - mean) <= _SUPPORT_SIGMAS * sdev
        xk = x[keep]
        log_term = (
            -0.5 * ((xk - mean) / sdev) ** 2
            - beta * xk**2
            + u[keep] ** 2
            - 0.5 * math.log(2.0 * math.pi * sdev**2)
        )
        vals = np.exp(log_term)
        if extra is not None:
            vals = vals * extra(xk)
        return float(math.sqrt(2.0) * sstar * np.sum(w[keep] * vals))

    def s_squared(x):
        return np.asarray(spectrum.value(x), dtype=float) ** 2

    mean_factor = narrow_gauss_average(k0, dwp, beta_mean, extra=s_squared)
    diff_factor = narrow_gauss_average(q0, 2.0 * dwp, beta_diff)
    numerator = mean_factor * diff_factor

    if smoothness:
        denominator = narrow_gauss_average(k0, dwp, 0.0, extra=s_squared)
    else:
        keep = np.abs(math.sqrt(2.0) * dwp * u) <= _SUPPORT_SIGMAS * dwp
        wbar = k0 + math.sqrt(2.0) * dwp * u[keep]
        dnodes = q0 + math.sqrt(2.0) * (2.0 * dwp) * u[keep]
        wb2, dn2 = np.meshgrid(wbar, dnodes, indexing="ij")
        ww = np.outer(wnorm[keep], wnorm[keep])
        denominator = float(
            np.sum(
                ww
                * np.asarray(spectrum.value(wb2 + 0.5 * dn2), dtype=float)
                * np.asarray(spectrum.value(wb2 - 0.5 * dn2), dtype=float)
            )
        )

    xi = 2.0 * k0 * math.sin(0.5 * phi)
    kin = PairKinematics(
        e=k0 * math.cos(0.5 * phi), q0=q0, q_perp=xi, q_par=abs(q0), phi=phi
    )
    return CorrelatorPoint(
        kinematics=kin, value=1.0 + lambda_max * numerator / denominator
    )


def averaged_transverse_scan(
    source: GaussianSource,
    spectrum: Spectrum,
    filt: FilterSpec,
    xi_grid,
    n_quad: int = 48,
    smoothness: bool = True,
    lambda_max: float = LAMBDA_MAX_CHAOTIC,
) -> ScanResult:
    """Transverse scan with both detectors behind the same filter: fixed
    filter center, opening angle varied so that xi = 2 K0 sin(phi/2)."""
    xi_grid = np.asarray(xi_grid, dtype=float)
    points = []
    for xi in xi_grid:
        arg = 0.5 * xi / filt.center
        if arg >= 1.0:
            raise DomainError(f"xi = {xi} eV unreachable at filter center {filt.center} eV")
        phi = 2.0 * math.asin(arg)
        p = averaged_correlator(
            source, spectrum, filt, filt, phi, n_quad, smoothness, lambda_max
        )
        # canonical transverse kinematics: exact q0 = 0 and the grid xi
        kin = PairKinematics(
            e=filt.center * math.cos(0.5 * phi), q0=0.0, q_perp=xi, q_par=0.0, phi=phi
        )
        points.append(CorrelatorPoint(kinematics=kin, value=p.value))
    return ScanResult(
        scan_kind="transverse",
        e=filt.center,
        points=points,
        source_label=source.label,
        meta={
            "engine": "filtered",
            "filter_center_ev": filt.center,
            "filter_width_ev": filt.width,
            "lambda_max": lambda_max,
        },
    )


@dataclass(frozen=True)
class InterceptCurve:
    """Effective intercept tabulated against flash duration, with the knee
    where delta_omega * R_par / (hbar c) = 1."""

    delta_omega: float
    dtau_fs: np.ndarray
    r_par_nm: np.ndarray
    intercept: np.ndarray
    knee_dtau_fs: float


def intercept_curve(
    delta_lambda_nm: float,
    lambda_center_nm: float,
    r_par_grid,
    lambda_max: float = LAMBDA_MAX_CHAOTIC,
) -> InterceptCurve:
    """Tabulate the effective intercept over an R_par grid [nm] for a filter
    band width given in wavelength terms (rms convention).

    The knee dtau* = hbar c / (c delta_omega) separates full-strength
    intercepts (dtau << dtau*) from the 1/dtau falloff (dtau >> dtau*).
    delta_lambda_nm = 0 is allowed: the curve is constant at 1 + lambda and
    the knee is reported as inf.
    """
    r_par = np.asarray(r_par_grid, dtype=float)
    if np.any(r_par < 0):
        raise DomainError("R_par grid must be >= 0")
    dw = delta_omega_for_dlambda(lambda_center_nm, delta_lambda_nm)
    vals = np.array([effective_intercept(dw, r, lambda_max) for r in r_par])
    knee = math.inf if dw == 0.0 else HBAR_C_EV_NM / (C_NM_PER_FS * dw)
    return InterceptCurve(
        delta_omega=dw,
        dtau_fs=r_par / C_NM_PER_FS,
        r_par_nm=r_par,
        intercept=vals,
        knee_dtau_fs=knee,
    )


def pair_acceptance(
    f_a: FilterSpec, f_b: FilterSpec, spectrum: Spectrum, n_quad: int = 48
) -> float:
    """Coincidence-rate scaling hook: the double integral of the unnormalized
    (unit-peak) filter transmissions against the spectra,
    int T_a(w1) s(w1) dw1 * int T_b(w2) s(w2) dw2. On a locally flat spectrum
    this scales as the product of band widths, i.e. (delta_lambda)^2 for
    equal filters."""
    _check_filter_support(f_a, spectrum)
    _check_filter_support(f_b, spectrum)
    u, w = np.polynomial.hermite.hermgauss(n_quad)

    def one_arm(f: FilterSpec) -> float:
        # unit-peak transmission: exp(-(w-c)^2 / 2 dw^2); GH absorbs it with
        # substitution omega = c + sqrt(2) dw u, leaving dw sqrt(2) sum(w s)
        omega = f.center + math.sqrt(2.0) * f.width * u
        s = np.asarray(spectrum.value(omega), dtype=float)
        return float(math.sqrt(2.0) * f.width * np.sum(w * s))

    return one_arm(f_a) * one_arm(f_b)
