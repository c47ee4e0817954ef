"""Single-photon and pair-level kinematics.

A photon pair measured by two detectors at opening angle phi with energies
(omega_a, omega_b) is described relative to the pair momentum direction:
E is half the magnitude of the summed 3-momenta, q0 the signed energy
difference, and (q_perp, q_par) the transverse/longitudinal components of the
relative momentum. Two independent constructions are provided: closed-form
relations in (omega_a, omega_b, phi), and an explicit 3-vector projection used
as a geometric oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGeometryError, DomainError
from .units import TransparencyWindow

_DIRECTION_TOL = 1e-12


@dataclass(frozen=True)
class PhotonMomentum:
    """On-shell photon: energy omega [eV] and a unit propagation direction."""

    omega: float
    direction: np.ndarray

    def __post_init__(self):
        if self.omega <= 0:
            raise DomainError(f"photon energy must be positive, got {self.omega}")
        d = np.asarray(self.direction, dtype=float)
        if d.shape != (3,):
            raise DomainError("direction must be a 3-vector")
        if abs(np.linalg.norm(d) - 1.0) > _DIRECTION_TOL:
            raise DomainError("direction must be a unit vector (|d| = 1 within 1e-12)")
        object.__setattr__(self, "direction", d)

    @property
    def k(self) -> np.ndarray:
        """3-momentum in eV (omega = |k| on shell)."""
        return self.omega * self.direction


@dataclass(frozen=True)
class PairKinematics:
    """Pair variables: E, signed q0, non-negative q_perp/q_par [eV], opening
    angle phi [rad]. The correlator depends only on the squares of q_perp and
    q_par, so they are stored as magnitudes; q0 keeps its sign."""

    e: float
    q0: float
    q_perp: float
    q_par: float
    phi: float

    def __post_init__(self):
        if self.e <= 0:
            raise DegenerateGeometryError(f"pair energy E must be positive, got {self.e}")
        if self.q_perp < 0 or self.q_par < 0:
            raise DomainError("q_perp and q_par are magnitudes, must be >= 0")
        if not (0.0 <= self.phi <= math.pi):
            raise DomainError(f"opening angle must lie in [0, pi], got {self.phi}")

    @property
    def omega_a(self) -> float:
        return 0.5 * (self.omega_sum + self.q0)

    @property
    def omega_b(self) -> float:
        return 0.5 * (self.omega_sum - self.q0)

    @property
    def omega_sum(self) -> float:
        # omega_a + omega_b = 2*K0; recovered from E and the opening angle via
        # (omega_a + omega_b)^2 = 4E^2 + 4 omega_a omega_b sin^2(phi/2) would
        # need the product; store-free recovery uses q0 and E instead:
        # 4E^2 = wa^2 + wb^2 + 2 wa wb cos(phi) and q0 = wa - wb.
        c = math.cos(self.phi)
        # (wa + wb)^2 (1 + c)/2 + q0^2 (1 - c)/2 = 4E^2  =>  solve for (wa+wb)^2
        half = 0.5 * (1.0 + c)
        if half <= 0.0:
            raise DegenerateGeometryError("omega sum undefined at phi = pi")
        return math.sqrt((4.0 * self.e**2 - self.q0**2 * 0.5 * (1.0 - c)) / half)


def pair_from_detector(omega_a: float, omega_b: float, phi: float) -> PairKinematics:
    """Pair kinematics from detector settings via the closed-form relations.

    Parameters
    ----------
    omega_a, omega_b : float
        Photon energies [eV], both positive.
    phi : float
        Detector opening angle [rad], in [0, pi). phi = pi is excluded: the
        longitudinal direction degenerates when E -> 0 and tan(phi/2)
        overflows before that.

    Returns
    -------
    PairKinematics
        E computed exactly from the law of cosines; q_perp, q_par from
        q_perp^2 = (4E^2 + q0^4/4E^2 - 2 q0^2) tan^2(phi/2) and
        q_par^2  = q0^2 + (q0^2 - q0^4/4E^2) tan^2(phi/2).
    """
    if omega_a <= 0 or omega_b <= 0:
        raise DomainError("photon energies must be positive")
    if not (0.0 <= phi < math.pi):
        raise DegenerateGeometryError(
            f"opening angle must lie in [0, pi), got {phi}"
        )
    e = 0.5 * math.sqrt(
        omega_a**2 + omega_b**2 + 2.0 * omega_a * omega_b * math.cos(phi)
    )
    if e == 0.0:
        raise DegenerateGeometryError("summed momentum vanishes, E = 0")
    q0 = omega_a - omega_b
    t2 = math.tan(0.5 * phi) ** 2
    q_perp_sq = (4.0 * e**2 + q0**4 / (4.0 * e**2) - 2.0 * q0**2) * t2
    q_par_sq = q0**2 + (q0**2 - q0**4 / (4.0 * e**2)) * t2
    return PairKinematics(
        e=e,
        q0=q0,
        q_perp=math.sqrt(max(q_perp_sq, 0.0)),
        q_par=math.sqrt(max(q_par_sq, 0.0)),
        phi=phi,
    )


def pair_from_vectors(k_a: PhotonMomentum, k_b: PhotonMomentum) -> PairKinematics:
    """Pair kinematics by explicit 3-vector projection; geometric oracle for
    pair_from_detector.

    q_par is the magnitude of the projection of q = k_a - k_b onto the pair
    direction K_hat, q_perp the magnitude of the rejection.
    """
    ka = k_a.k
    kb = k_b.k
    ksum = ka + kb
    e = 0.5 * float(np.linalg.norm(ksum))
    if e <= _DIRECTION_TOL * (k_a.omega + k_b.omega):
        raise DegenerateGeometryError(
            "summed momentum vanishes; longitudinal direction undefined"
        )
    khat = ksum / (2.0 * e)
    q = ka - kb
    q_par_signed = float(q @ khat)
    q_perp_vec = q - q_par_signed * khat
    cosphi = float(np.clip(k_a.direction @ k_b.direction, -1.0, 1.0))
    sinphi = float(np.linalg.norm(np.cross(k_a.direction, k_b.direction)))
    return PairKinematics(
        e=e,
        q0=k_a.omega - k_b.omega,
        q_perp=float(np.linalg.norm(q_perp_vec)),
        q_par=abs(q_par_signed),
        phi=math.atan2(sinphi, cosphi),
    )


def detector_pair_vectors(
    omega_a: float, omega_b: float, phi: float
) -> tuple[PhotonMomentum, PhotonMomentum]:
    """Explicit photon momenta for detector settings: both directions in the
    x-y plane, symmetric about the x axis at opening angle phi."""
    if omega_a <= 0 or omega_b <= 0:
        raise DomainError("photon energies must be positive")
    half = 0.5 * phi
    da = np.array([math.cos(half), math.sin(half), 0.0])
    db = np.array([math.cos(half), -math.sin(half), 0.0])
    return PhotonMomentum(omega_a, da), PhotonMomentum(omega_b, db)


def xi_variable(e: float, phi: float) -> float:
    """Transverse scan abscissa xi = 2 E tan(phi/2) [eV]; equals q_perp
    exactly for equal-energy pairs (q0 = 0)."""
    if not (0.0 <= phi < math.pi):
        raise DegenerateGeometryError(f"opening angle must lie in [0, pi), got {phi}")
    return 2.0 * e * math.tan(0.5 * phi)


def opening_angle_for_xi(xi: float, e: float) -> float:
    """Inverse of xi_variable: phi = 2 atan(xi / 2E)."""
    if xi < 0:
        raise DomainError("xi must be >= 0")
    if e <= 0:
        raise DomainError("E must be positive")
    return 2.0 * math.atan(0.5 * xi / e)


def max_accessible_xi(e: float, window: TransparencyWindow) -> float:
    """Largest xi reachable for equal-energy pairs at pair energy E.

    Each photon of an equal-energy pair has omega = E / cos(phi/2); requiring
    omega <= window.max caps the opening angle at cos(phi_max/2) = E/window.max
    and hence xi_max = 2 E tan(phi_max/2) = 2 sqrt(window.max^2 - E^2).
    Always finite or an error, never an infinity sentinel.
    """
    if not (window.min_ev < e < window.max_ev):
        raise DomainError(
            f"pair energy {e} eV outside the transparency window "
            f"({window.min_ev}, {window.max_ev}) eV: no accessible opening angle"
        )
    return 2.0 * math.sqrt(window.max_ev**2 - e**2)


def q0_qpar_gap(pair: PairKinematics) -> float:
    """Diagnostic for the q0 ~ q_par shorthand: relative gap
    | |q0| - q_par | / max(|q0|, q_par), or 0 when both vanish.

    The toolkit always uses the exact relations; this only reports how far
    the shorthand would have been off for the given kinematics.
    """
    top = abs(abs(pair.q0) - pair.q_par)
    scale = max(abs(pair.q0), pair.q_par)
    return 0.0 if scale == 0.0 else top / scale
