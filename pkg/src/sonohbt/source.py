"""Parametric emission functions.

The emission function factorizes into a normalized space-time profile times an
energy spectrum, S(x; E) = X(x) * s(E). X is an isotropic spatial Gaussian of
per-axis rms sigma_r [nm] times a temporal Gaussian of rms delta_tau [fs].
An optional flow boost multiplies X by a first-order Doppler-like weight and
is used to verify that slow bubble dynamics leaves no interferometric trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DomainError, InsufficientMarginError
from .units import C_NM_PER_FS

_FD_REL_STEP = 1e-3  # finite-difference step h = 1e-3 * E for tabulated spectra


@dataclass(frozen=True)
class GaussianSource:
    """Gaussian space-time emission profile.

    sigma_r   : per-axis spatial rms [nm] of the isotropic spatial Gaussian
    delta_tau : temporal rms (flash duration) [fs]
    center_t  : temporal centroid [fs]
    """

    sigma_r: float
    delta_tau: float
    center_t: float = 0.0

    def __post_init__(self):
        if self.sigma_r < 0 or self.delta_tau < 0:
            raise DomainError("sigma_r and delta_tau must be >= 0")
        if self.sigma_r == 0 and self.delta_tau == 0:
            raise DomainError("source must have nonzero spatial or temporal extent")

    @property
    def label(self) -> str:
        return f"gaussian sigma_r={self.sigma_r:g}nm delta_tau={self.delta_tau:g}fs"


@dataclass(frozen=True)
class FlowBoost:
    """Collective expansion entering as a first-order (v/c) Doppler-like
    weight. profile 'linear_radial' means v(r) = v_over_c * c * r / sigma_r,
    i.e. the quoted velocity is reached at r = sigma_r. temperature is the
    Boltzmann scale of the weight."""

    v_over_c: float = 0.0
    profile: str = "none"
    temperature: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.v_over_c < 1.0):
            raise DomainError("v_over_c must lie in [0, 1)")
        if self.profile not in ("none", "linear_radial"):
            raise DomainError(f"unknown flow profile {self.profile!r}")
        if self.temperature <= 0:
            raise DomainError("flow temperature must be positive")

    @property
    def active(self) -> bool:
        return self.profile != "none" and self.v_over_c > 0.0


NO_FLOW = FlowBoost()


class Spectrum:
    """Base class for single-photon energy spectra s(E) > 0 on a domain."""

    kind = "abstract"
    e_min = 0.0
    e_max = math.inf

    def value(self, e):
        raise NotImplementedError

    def log_derivs(self, e: float) -> tuple[float, float]:
        """(d ln s / dE [1/eV], d^2 ln s / dE^2 [1/eV^2])."""
        raise NotImplementedError

    def check_domain(self, e) -> None:
        e = np.asarray(e, dtype=float)
        if np.any(e <= self.e_min) or np.any(e >= self.e_max):
            raise DomainError(
                f"energy outside spectrum domain ({self.e_min}, {self.e_max}) eV"
            )

    def _check_margin(self, e: float) -> None:
        h = _FD_REL_STEP * e
        if not (self.e_min + 2 * h < e < self.e_max - 2 * h):
            raise InsufficientMarginError(
                f"E = {e} eV too close to spectrum domain edge "
                f"({self.e_min}, {self.e_max}) for a 2-step stencil"
            )

    @property
    def label(self) -> str:
        return self.kind


@dataclass(frozen=True)
class ExponentialSpectrum(Spectrum):
    """s(E) = exp(-E/T); ln s is linear so the curvature vanishes."""

    temperature: float = 1.0
    kind = "exponential"
    e_min = 0.0
    e_max = math.inf

    def __post_init__(self):
        if self.temperature <= 0:
            raise DomainError("temperature must be positive")

    def value(self, e):
        self.check_domain(e)
        return np.exp(-np.asarray(e, dtype=float) / self.temperature)

    def log_derivs(self, e):
        self._check_margin(e)
        return (-1.0 / self.temperature, 0.0)

    @property
    def label(self):
        return f"exponential(T={self.temperature:g}eV)"


@dataclass(frozen=True)
class PowerLawSpectrum(Spectrum):
    """s(E) = E**alpha."""

    alpha: float = 2.0
    kind = "power_law"
    e_min = 0.0
    e_max = math.inf

    def value(self, e):
        self.check_domain(e)
        return np.asarray(e, dtype=float) ** self.alpha

    def log_derivs(self, e):
        self._check_margin(e)
        return (self.alpha / e, -self.alpha / e**2)

    @property
    def label(self):
        return f"power_law(alpha={self.alpha:g})"


@dataclass(frozen=True)
class BlackbodySpectrum(Spectrum):
    """Planck-shaped s(E) = E^3 / (exp(E/T) - 1) up to a constant."""

    temperature: float = 1.0
    kind = "blackbody"
    e_min = 0.0
    e_max = math.inf

    def __post_init__(self):
        if self.temperature <= 0:
            raise DomainError("temperature must be positive")

    def value(self, e):
        self.check_domain(e)
        e = np.asarray(e, dtype=float)
        return e**3 / np.expm1(e / self.temperature)

    def log_derivs(self, e):
        self._check_margin(e)
        t = self.temperature
        u = e / t
        d1 = 3.0 / e - (1.0 / t) / (-math.expm1(-u))
        d2 = -3.0 / e**2 + (1.0 / t**2) * math.exp(u) / math.expm1(u) ** 2
        return (d1, d2)

    @property
    def label(self):
        return f"blackbody(T={self.temperature:g}eV)"


class TabulatedSpectrum(Spectrum):
    """Spectrum interpolated from a strictly increasing (E, intensity) grid
    with a cubic spline. Extrapolation is forbidden; log-derivatives use
    second-order central differences with step h = 1e-3 * E."""

    kind = "tabulated"

    def __init__(self, energies, intensities):
        e = np.asarray(energies, dtype=float)
        s = np.asarray(intensities, dtype=float)
        if e.ndim != 1 or e.shape != s.shape:
            raise DomainError("tabulated spectrum needs matching 1-d E and intensity arrays")
        if e.size < 4:
            raise DomainError("tabulated spectrum needs >= 4 grid points")
        if np.any(np.diff(e) <= 0):
            raise DomainError("tabulated energies must be strictly increasing")
        if np.any(s <= 0):
            raise DomainError("tabulated intensities must be positive")
        self._spline = CubicSpline(e, s)
        self.e_min = float(e[0])
        self.e_max = float(e[-1])
        self._grid_e = e
        self._grid_s = s

    @classmethod
    def from_file(cls, path) -> "TabulatedSpectrum":
        """Load a two-column text table (E_eV, intensity); '#' starts a comment."""
        data = np.loadtxt(Path(path), comments="#", ndmin=2)
        if data.shape[1] < 2:
            raise DomainError(f"{path}: expected two columns (E_eV, intensity)")
        return cls(data[:, 0], data[:, 1])

    def check_domain(self, e) -> None:
        e = np.asarray(e, dtype=float)
        if np.any(e < self.e_min) or np.any(e > self.e_max):
            raise DomainError(
                f"energy outside tabulated domain [{self.e_min}, {self.e_max}] eV "
                "(extrapolation forbidden)"
            )

    def value(self, e):
        self.check_domain(e)
        return self._spline(np.asarray(e, dtype=float))

    def log_derivs(self, e):
        self._check_margin(e)
        h = _FD_REL_STEP * e
        lnm2, lnm1, ln0, lnp1, lnp2 = np.log(
            self.value(np.array([e - 2 * h, e - h, e, e + h, e + 2 * h]))
        )
        d1 = (lnp1 - lnm1) / (2.0 * h)
        d2 = (lnp1 - 2.0 * ln0 + lnm1) / h**2
        return (float(d1), float(d2))

    @property
    def label(self):
        return f"tabulated[{self.e_min:g},{self.e_max:g}]eV"


def spectrum_log_derivs(spectrum: Spectrum, e: float) -> tuple[float, float]:
    """Slope and curvature of the logarithmic single-photon intensity spectrum
    at E. For a factorized source the space-time integral contributes an
    E-independent constant, so these equal the log-derivatives of s(E)."""
    return spectrum.log_derivs(e)


def flow_shift_nm(source: GaussianSource, flow: FlowBoost, e: float) -> float:
    """Mean displacement [nm] of the flow-weighted spatial profile along the
    pair direction.

    For the linear radial profile the local boost weight is
    exp(e * v_over_c * x_par / (sigma_r * T)); multiplying the x_par Gaussian
    by it shifts the mean to sigma_r * v_over_c * e / T with unchanged widths.
    """
    if not flow.active or source.sigma_r == 0.0:
        return 0.0
    return flow.v_over_c * e * source.sigma_r / flow.temperature


def _flow_weight(flow: FlowBoost, source: GaussianSource, e: float, x_par):
    if not flow.active or source.sigma_r == 0.0:
        return np.ones_like(np.asarray(x_par, dtype=float))
    kappa = flow.v_over_c * e / (source.sigma_r * flow.temperature)  # 1/nm
    return np.exp(kappa * np.asarray(x_par, dtype=float))


def evaluate(
    source: GaussianSource,
    spectrum: Spectrum,
    flow: FlowBoost,
    t: float,
    x_par: float,
    x_perp1: float,
    x_perp2: float,
    e: float,
):
    """Emission density at a space-time point (t [fs], x [nm]) and energy E.

    x_par is the coordinate along the pair momentum direction. Without flow
    this is X(x) * s(E) with X normalized to unit space-time integral; with a
    linear radial flow, the profile is additionally weighted by the
    first-order boost factor exp(E (v(r)/c)(x_par/r) / T), which for the
    linear profile reduces to exp(E v_over_c x_par / (sigma_r T)).
    Requires positive widths: a zero-width profile has no pointwise density.
    """
    spectrum.check_domain(e)
    if source.sigma_r <= 0 or source.delta_tau <= 0:
        raise DomainError(
            "pointwise evaluation needs sigma_r > 0 and delta_tau > 0; "
            "zero-width profiles only exist under integrals"
        )
    t = np.asarray(t, dtype=float)
    x_par = np.asarray(x_par, dtype=float)
    x_perp1 = np.asarray(x_perp1, dtype=float)
    x_perp2 = np.asarray(x_perp2, dtype=float)
    r2 = x_par**2 + x_perp1**2 + x_perp2**2
    norm = 1.0 / (
        (2.0 * math.pi) ** 1.5 * source.sigma_r**3
        * math.sqrt(2.0 * math.pi) * source.delta_tau
    )
    spatial = np.exp(-0.5 * r2 / source.sigma_r**2)
    temporal = np.exp(-0.5 * ((t - source.center_t) / source.delta_tau) ** 2)
    return norm * spatial * temporal * spectrum.value(e) * _flow_weight(
        flow, source, e, x_par
    )
