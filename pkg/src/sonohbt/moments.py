"""Space-time variances, spectrum-derivative corrections, and the composed
transverse/longitudinal interferometric radii.

All variances are central moments of the emission density at fixed E, taken
in coordinates aligned with the pair momentum (x_par along it). The composed
radii are
    R_perp^2 = <x_perp^2> + dR_perp^2
    R_par^2  = <x_par^2> + c^2 <t~^2> + dR_par^2
with the longitudinal cross term dropped by default (it is generated only by
collective expansion and is negligible for slow flows); an opt-in mode keeps
it for verification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ApproximationBreakdownError, DomainError, NumericalError
from .source import FlowBoost, GaussianSource, Spectrum, _flow_weight
from .units import C_NM_PER_FS, HBAR_C_EV_NM

_GH_LADDER = (16, 24, 32, 48, 64)
_QUAD_RTOL = 1e-7


@dataclass(frozen=True)
class SpaceTimeVariances:
    """Second central moments of the emission density: per-axis transverse and
    longitudinal spatial variances [nm^2], temporal variance [fs^2], the
    longitudinal-temporal cross moment [nm fs], and the mean longitudinal
    displacement [nm] (reported for flow diagnostics, cancels in radii)."""

    var_x_perp: float
    var_x_par: float
    var_t: float
    cross_x_par_t: float = 0.0
    mean_x_par: float = 0.0

    def __post_init__(self):
        if self.var_x_perp < 0 or self.var_x_par < 0 or self.var_t < 0:
            raise DomainError("variances must be >= 0")
        bound = math.sqrt(self.var_x_par * self.var_t)
        if abs(self.cross_x_par_t) > bound * (1.0 + 1e-12) + 1e-300:
            raise DomainError("cross moment violates the Cauchy-Schwarz bound")


@dataclass(frozen=True)
class HbtRadii:
    """Composed squared radii [nm^2] plus the correction terms that entered."""

    r_perp_sq: float
    r_par_sq: float
    delta_r_perp_sq: float = 0.0
    delta_r_par_sq: float = 0.0

    @classmethod
    def from_radii(cls, r_perp_nm: float = 0.0, r_par_nm: float = 0.0) -> "HbtRadii":
        """Directly specified radii (e.g. figure presets), no corrections."""
        if r_perp_nm < 0 or r_par_nm < 0:
            raise DomainError("radii must be >= 0")
        return cls(r_perp_sq=r_perp_nm**2, r_par_sq=r_par_nm**2)

    @property
    def r_perp(self) -> float:
        return math.sqrt(self.r_perp_sq)

    @property
    def r_par(self) -> float:
        return math.sqrt(self.r_par_sq)


def variances(
    source: GaussianSource,
    spectrum: Spectrum,
    flow: FlowBoost,
    e: float,
) -> SpaceTimeVariances:
    """Space-time variances of the emission density at energy E.

    Without flow the Gaussian closed forms apply (per-axis variance sigma_r^2,
    temporal variance delta_tau^2, vanishing first and cross moments) and are
    exactly E-independent. With flow the spatial moments are computed by
    Gauss-Hermite quadrature with order escalation; the stationary flow weight
    leaves the temporal factor untouched, so the centered cross moment
    <x~_par t~> factorizes to zero exactly.
    """
    spectrum.check_domain(e)
    if not flow.active:
        return SpaceTimeVariances(
            var_x_perp=source.sigma_r**2,
            var_x_par=source.sigma_r**2,
            var_t=source.delta_tau**2,
        )
    if source.sigma_r == 0.0:
        # no spatial extent: flow weight is constant, moments are trivial
        return SpaceTimeVariances(0.0, 0.0, source.delta_tau**2)

    sig = source.sigma_r
    prev = None
    diagnostics = []
    for order in _GH_LADDER:
        u, w = np.polynomial.hermite.hermgauss(order)
        x = math.sqrt(2.0) * sig * u  # N(0, sigma^2) nodes, weights w/sqrt(pi)
        xg, yg, zg = np.meshgrid(x, x, x, indexing="ij")
        wg = (
            w[:, None, None] * w[None, :, None] * w[None, None, :]
        ) * _flow_weight(flow, source, e, xg)
        norm = wg.sum()
        mean_par = float((wg * xg).sum() / norm)
        var_par = float((wg * (xg - mean_par) ** 2).sum() / norm)
        mean_perp = float((wg * yg).sum() / norm)
        var_perp = float((wg * (yg - mean_perp) ** 2).sum() / norm)
        est = np.array([mean_par, var_par, var_perp])
        diagnostics.append((order, est))
        if prev is not None:
            scale = np.maximum(np.abs(est), sig**2 * 1e-6)
            if np.max(np.abs(est - prev) / scale) <= _QUAD_RTOL:
                return SpaceTimeVariances(
                    var_x_perp=var_perp,
                    var_x_par=var_par,
                    var_t=source.delta_tau**2,
                    cross_x_par_t=0.0,
                    mean_x_par=mean_par,
                )
        prev = est
    raise NumericalError(
        "flow-weighted moment quadrature did not converge to 1e-7",
        diagnostics=diagnostics,
    )


def correction_terms(spectrum: Spectrum, e: float) -> tuple[float, float]:
    """Spectrum-derivative corrections to the squared radii [nm^2]:

    dR_perp^2 = (hbar c)^2 / (8 E) * d ln P1/dE
    dR_par^2  = (hbar c)^2 / 4     * d^2 ln P1/dE^2

    Either may be negative: they correct squared radii, and their magnitudes
    are set by the slope and curvature of the logarithmic intensity spectrum.
    """
    d1, d2 = spectrum.log_derivs(e)
    return (
        HBAR_C_EV_NM**2 / (8.0 * e) * d1,
        HBAR_C_EV_NM**2 / 4.0 * d2,
    )


def compose_radii(
    v: SpaceTimeVariances,
    corrections: tuple[float, float] = (0.0, 0.0),
    include_cross_term: bool = False,
) -> HbtRadii:
    """Compose transverse and longitudinal squared radii from variances and
    corrections. With include_cross_term the longitudinal radius uses the full
    <(x~_par - c t~)^2> = var_x_par + c^2 var_t - 2 c cross.

    Raises ApproximationBreakdownError when a composed squared radius is not
    positive: the corrections then overwhelm the geometry and the Gaussian
    formalism has left its validity range (an error, never a silent clamp).
    """
    d_perp, d_par = corrections
    r_perp_sq = v.var_x_perp + d_perp
    r_par_sq = v.var_x_par + C_NM_PER_FS**2 * v.var_t + d_par
    if include_cross_term:
        r_par_sq -= 2.0 * C_NM_PER_FS * v.cross_x_par_t
    if r_perp_sq <= 0.0 or r_par_sq <= 0.0:
        raise ApproximationBreakdownError(
            f"composed squared radii not positive (R_perp^2 = {r_perp_sq:g} nm^2, "
            f"R_par^2 = {r_par_sq:g} nm^2): corrections overwhelm the geometry"
        )
    return HbtRadii(
        r_perp_sq=r_perp_sq,
        r_par_sq=r_par_sq,
        delta_r_perp_sq=d_perp,
        delta_r_par_sq=d_par,
    )
