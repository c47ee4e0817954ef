"""Parameter extraction: Gaussian fits to scan data, flash-duration inversion
from the effective intercept, and resolvability classification.

Transverse scans are regressed against xi^2 and yield (intercept, R_perp);
longitudinal scans against q0^2 yield (intercept, R_par). The intercept is
kept free rather than pinned at 1 + lambda: band-width dilution and partial
coherence both show up there.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .correlator import ScanResult
from .errors import (
    ApproximationBreakdownError,
    ChaoticityViolationError,
    DomainError,
    UnfittableError,
)
from .units import C_NM_PER_FS, HBAR_C_EV_NM, TransparencyWindow
from .kinematics import max_accessible_xi, opening_angle_for_xi

_DETERMINISTIC_FLOOR = 1e-6  # C-1 below this is treated as no signal
_FLAT_FRACTION = 0.01        # minimum falloff of C-1 across the scan


@dataclass(frozen=True)
class FitResult:
    """Extracted radius [nm] and intercept with 1-sigma errors."""

    radius: float
    radius_err: float
    intercept: float
    intercept_err: float
    chi2_per_dof: float
    method: str
    n_points_used: int = 0

    def __post_init__(self):
        if self.radius < 0:
            raise DomainError("fitted radius must be >= 0")
        if not (1.0 <= self.intercept <= 1.5 + 3.0 * self.intercept_err + 1e-12):
            raise DomainError(
                f"fitted intercept {self.intercept:g} outside [1, 1.5 + 3 sigma]"
            )

    def to_text(self) -> str:
        lines = [
            f"radius_nm = {self.radius!r}",
            f"radius_err_nm = {self.radius_err!r}",
            f"intercept = {self.intercept!r}",
            f"intercept_err = {self.intercept_err!r}",
            f"chi2_per_dof = {self.chi2_per_dof!r}",
            f"method = {self.method}",
            f"n_points_used = {self.n_points_used}",
        ]
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(
            {
                "radius_nm": self.radius,
                "radius_err_nm": self.radius_err,
                "intercept": self.intercept,
                "intercept_err": self.intercept_err,
                "chi2_per_dof": self.chi2_per_dof,
                "method": self.method,
                "n_points_used": self.n_points_used,
            },
            indent=2,
        )


def _regression_inputs(scan: ScanResult):
    """(x2, values, sigmas, weighted) with noise-floor exclusions applied."""
    if scan.scan_kind == "transverse":
        x = scan.xi_values
    else:
        x = np.abs(scan.abscissae)
    c = scan.values
    s = scan.stat_errors
    weighted = bool(np.any(s > 0))
    floor = s if weighted else np.full_like(c, _DETERMINISTIC_FLOOR)
    mask = (c - 1.0) > np.maximum(floor, _DETERMINISTIC_FLOOR)
    if int(mask.sum()) < 5:
        raise UnfittableError(
            f"only {int(mask.sum())} points rise above the noise floor; need >= 5"
        )
    cm = c[mask]
    fall = cm.max() - cm.min()
    flat_scale = _FLAT_FRACTION * (cm.max() - 1.0)
    if weighted:
        flat_scale = max(flat_scale, 3.0 * float(np.median(s[mask])))
    if fall < flat_scale:
        raise UnfittableError(
            f"scan is flat: total falloff {fall:g} below the significance "
            f"threshold {flat_scale:g}"
        )
    sig = s[mask]
    if weighted:
        positive = sig[sig > 0]
        sig = np.where(sig > 0, sig, positive.min())
    return x[mask] ** 2, cm, sig, weighted


def _linearized_log_fit(x2, c, sig, weighted):
    """Weighted linear regression of ln(2(C-1)) on the squared abscissa."""
    y = np.log(2.0 * (c - 1.0))
    if weighted:
        wts = ((c - 1.0) / sig) ** 2  # var of y_i = (sig_i / (C_i - 1))^2
    else:
        wts = np.ones_like(y)
    sw = wts.sum()
    xm = (wts * x2).sum() / sw
    ym = (wts * y).sum() / sw
    sxx = (wts * (x2 - xm) ** 2).sum()
    if sxx == 0.0:
        raise UnfittableError("degenerate abscissa grid")
    slope = (wts * (x2 - xm) * (y - ym)).sum() / sxx
    icpt = ym - slope * xm
    resid = y - (icpt + slope * x2)
    chi2 = float((wts * resid**2).sum())
    dof = max(len(y) - 2, 1)
    var_scale = 1.0 if weighted else chi2 / dof
    var_slope = var_scale / sxx
    var_icpt = var_scale * (1.0 / sw + xm**2 / sxx)
    return slope, icpt, math.sqrt(var_slope), math.sqrt(var_icpt), chi2 / dof


def fit_scan(scan: ScanResult, method: str = "linearized_log") -> FitResult:
    """Fit C = 1 + (I - 1) exp(-R^2 x^2 / (hbar c)^2) to a scan.

    linearized_log regresses ln(2(C-1)) on x^2 by weighted least squares
    (stat_error weights when present, unit weights otherwise; points within
    the noise floor of 1 are excluded since the log of noise biases slopes).
    nonlinear_ls refines (intercept, R^2) with a Levenberg-Marquardt-style
    least-squares iteration seeded by the linearized result.
    """
    if method not in ("linearized_log", "nonlinear_ls"):
        raise DomainError(f"unknown fit method {method!r}")
    x2, c, sig, weighted = _regression_inputs(scan)
    slope, icpt, slope_err, icpt_err, chi2_dof = _linearized_log_fit(
        x2, c, sig, weighted
    )
    if slope >= 0.0:
        raise ApproximationBreakdownError(
            f"fitted squared radius is negative (slope {slope:g} >= 0)"
        )
    r_sq = -slope * HBAR_C_EV_NM**2
    radius = math.sqrt(r_sq)
    intercept = 1.0 + 0.5 * math.exp(icpt)

    if method == "linearized_log":
        radius_err = HBAR_C_EV_NM**2 * slope_err / (2.0 * radius)
        intercept_err = 0.5 * math.exp(icpt) * icpt_err
        return FitResult(
            radius=radius,
            radius_err=radius_err,
            intercept=intercept,
            intercept_err=intercept_err,
            chi2_per_dof=chi2_dof,
            method=method,
            n_points_used=len(c),
        )

    def residuals(theta):
        icept, rsq = theta
        model = 1.0 + (icept - 1.0) * np.exp(-rsq * x2 / HBAR_C_EV_NM**2)
        return (model - c) / sig if weighted else (model - c)

    res = least_squares(
        residuals,
        x0=np.array([intercept, r_sq]),
        bounds=([1.0, 0.0], [2.0, np.inf]),
        method="trf",
        x_scale=np.array([0.1, max(r_sq, 1.0)]),
    )
    if not res.success:
        raise UnfittableError(f"nonlinear refinement failed: {res.message}")
    icept, rsq = res.x
    if rsq <= 0.0:
        raise ApproximationBreakdownError("refined squared radius is not positive")
    dof = max(len(c) - 2, 1)
    chi2 = float(2.0 * res.cost)
    jtj = res.jac.T @ res.jac
    try:
        cov = np.linalg.inv(jtj)
    except np.linalg.LinAlgError:
        raise UnfittableError("singular covariance in nonlinear fit")
    if not weighted:
        cov = cov * (chi2 / dof)
    icept_err = math.sqrt(max(cov[0, 0], 0.0))
    rsq_err = math.sqrt(max(cov[1, 1], 0.0))
    radius = math.sqrt(rsq)
    return FitResult(
        radius=radius,
        radius_err=rsq_err / (2.0 * radius) if radius > 0 else 0.0,
        intercept=float(icept),
        intercept_err=icept_err,
        chi2_per_dof=chi2 / dof,
        method=method,
        n_points_used=len(c),
    )


def pulse_length_from_intercept(
    measured_intercept: float,
    delta_omega: float,
    lambda_max: float = 0.5,
) -> float:
    """Invert the effective-intercept relation for the flash duration [fs]:

    R_par = (hbar c / 2 delta_omega) sqrt((lambda/(C-1))^2 - 1),
    dtau = R_par / c.

    Assumes c dtau dominates the longitudinal radius (caller-asserted).
    An intercept at the chaotic ceiling 1 + lambda means zero duration; one
    at or below 1 is inconsistent with chaotic emission.
    """
    if delta_omega <= 0:
        raise DomainError("delta_omega must be positive")
    if measured_intercept <= 1.0:
        raise ChaoticityViolationError(
            f"intercept {measured_intercept:g} <= 1: no Bose-enhancement signal"
        )
    ceiling = 1.0 + lambda_max
    if measured_intercept >= ceiling:
        if measured_intercept > ceiling * (1.0 + 1e-12):
            raise DomainError(
                f"intercept {measured_intercept:g} above the chaotic ceiling {ceiling:g}"
            )
        return 0.0
    arg = (lambda_max / (measured_intercept - 1.0)) ** 2 - 1.0
    r_par = HBAR_C_EV_NM / (2.0 * delta_omega) * math.sqrt(arg)
    return r_par / C_NM_PER_FS


@dataclass(frozen=True)
class ResolvabilityThresholds:
    """Suppression thresholds for the transverse verdict: resolvable needs the
    1/e point of C-1 inside the accessible window, marginal needs at least the
    floor suppression at the window edge."""

    primary_suppression: float = 1.0 - math.exp(-1.0)
    marginal_floor: float = 0.20


@dataclass(frozen=True)
class Instrument:
    """Detector capabilities: smallest realizable opening angle and per-arm
    angular aperture [deg], and the filter rms energy resolution [eV]."""

    min_opening_deg: float = 0.5
    aperture_deg: float = 0.5
    delta_omega_ev: float = 1e-3

    @property
    def angular_resolution_deg(self) -> float:
        return max(self.min_opening_deg, self.aperture_deg)


@dataclass(frozen=True)
class ResolvabilityReport:
    target: str            # transverse_radius | pulse_length
    verdict: str           # resolvable | marginal | unresolvable
    limiting_factor: str   # window_edge | angular_resolution | filter_bandwidth
    required_setting_value: float
    required_setting_unit: str
    details: dict = field(default_factory=dict)

    def to_text(self) -> str:
        lines = [
            f"target = {self.target}",
            f"verdict = {self.verdict}",
            f"limiting_factor = {self.limiting_factor}",
            f"required_setting = {self.required_setting_value:.6g} {self.required_setting_unit}",
        ]
        lines += [f"{k} = {v:.6g}" if isinstance(v, float) else f"{k} = {v}"
                  for k, v in self.details.items()]
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "verdict": self.verdict,
            "limiting_factor": self.limiting_factor,
            "required_setting": {
                "value": self.required_setting_value,
                "unit": self.required_setting_unit,
            },
            "details": self.details,
        }


def resolve_transverse(
    r_perp: float,
    e: float,
    window: TransparencyWindow,
    instrument: Instrument,
    thresholds: ResolvabilityThresholds = ResolvabilityThresholds(),
) -> ResolvabilityReport:
    """Classify whether a transverse radius [nm] is measurable at pair energy
    E given the window and the instrument's angular capabilities."""
    if r_perp <= 0:
        raise DomainError("r_perp must be positive")
    xi_max = max_accessible_xi(e, window)
    xi_1e = HBAR_C_EV_NM / r_perp  # C-1 falls to 1/e here
    suppression_edge = 1.0 - math.exp(-((r_perp * xi_max / HBAR_C_EV_NM) ** 2))
    details = {
        "xi_one_over_e_ev": xi_1e,
        "xi_max_ev": xi_max,
        "suppression_at_window_edge": suppression_edge,
    }
    if xi_1e <= xi_max:
        phi_1e_deg = math.degrees(opening_angle_for_xi(xi_1e, e))
        details["phi_one_over_e_deg"] = phi_1e_deg
        if phi_1e_deg >= instrument.angular_resolution_deg:
            # resolvable; report the tighter of the two margins as limiting
            window_margin = xi_1e / xi_max
            angle_margin = instrument.angular_resolution_deg / phi_1e_deg
            limiting = (
                "window_edge" if window_margin >= angle_margin else "angular_resolution"
            )
            return ResolvabilityReport(
                target="transverse_radius",
                verdict="resolvable",
                limiting_factor=limiting,
                required_setting_value=phi_1e_deg,
                required_setting_unit="deg",
                details=details,
            )
        return ResolvabilityReport(
            target="transverse_radius",
            verdict="unresolvable",
            limiting_factor="angular_resolution",
            required_setting_value=phi_1e_deg,
            required_setting_unit="deg",
            details=details,
        )
    # 1/e point outside the window: judge by suppression at the edge
    required_omega_max = math.sqrt(e**2 + 0.25 * xi_1e**2)
    verdict = (
        "marginal" if suppression_edge >= thresholds.marginal_floor else "unresolvable"
    )
    return ResolvabilityReport(
        target="transverse_radius",
        verdict=verdict,
        limiting_factor="window_edge",
        required_setting_value=required_omega_max,
        required_setting_unit="eV (window max for the 1/e point)",
        details=details,
    )


def resolve_pulse_length(
    r_par: float, instrument: Instrument
) -> ResolvabilityReport:
    """Classify whether the longitudinal correlator can resolve a given
    longitudinal radius [nm] (R_par ~ c * flash duration): the filter rms
    width must not exceed the q0 scale hbar c / R_par where C-1 falls to 1/e."""
    if r_par <= 0:
        raise DomainError("r_par must be positive")
    q0_1e = HBAR_C_EV_NM / r_par
    details = {
        "q0_one_over_e_ev": q0_1e,
        "delta_omega_ev": instrument.delta_omega_ev,
        "dtau_fs": r_par / C_NM_PER_FS,
    }
    verdict = "resolvable" if instrument.delta_omega_ev <= q0_1e else "unresolvable"
    return ResolvabilityReport(
        target="pulse_length",
        verdict=verdict,
        limiting_factor="filter_bandwidth",
        required_setting_value=q0_1e * 1e3,
        required_setting_unit="meV (max filter rms width)",
        details=details,
    )


def resolvability(
    sigma_r: float,
    delta_tau: float,
    e: float,
    window: TransparencyWindow,
    instrument: Instrument,
    thresholds: ResolvabilityThresholds = ResolvabilityThresholds(),
) -> list[ResolvabilityReport]:
    """Both verdicts for a Gaussian source: transverse radius R_perp = sigma_r
    and longitudinal radius R_par = sqrt(sigma_r^2 + c^2 delta_tau^2)."""
    reports = []
    if sigma_r > 0:
        reports.append(
            resolve_transverse(sigma_r, e, window, instrument, thresholds)
        )
    r_par = math.sqrt(sigma_r**2 + (C_NM_PER_FS * delta_tau) ** 2)
    if r_par > 0:
        reports.append(resolve_pulse_length(r_par, instrument))
    return reports
