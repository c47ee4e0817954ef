"""Unit system and physical constants.

Everything in the toolkit is expressed in (eV, nm, fs). Photon momenta and
energies are interchangeable (omega = |k| in eV); correlator exponents of the
form q.R therefore carry explicit 1/(hbar c) factors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

# Single source of truth; no other module redefines these.
HBAR_C_EV_NM = 197.3269804   # hbar*c [eV nm]
C_NM_PER_FS = 299.792458     # speed of light [nm/fs]
H_C_EV_NM = 2.0 * math.pi * HBAR_C_EV_NM  # h*c [eV nm], for wavelength conversions


def photon_energy_ev(wavelength_nm: float) -> float:
    """Photon energy in eV for a vacuum wavelength in nm."""
    if wavelength_nm <= 0:
        raise DomainError(f"wavelength must be positive, got {wavelength_nm}")
    return H_C_EV_NM / wavelength_nm


def photon_wavelength_nm(energy_ev: float) -> float:
    """Vacuum wavelength in nm for a photon energy in eV."""
    if energy_ev <= 0:
        raise DomainError(f"photon energy must be positive, got {energy_ev}")
    return H_C_EV_NM / energy_ev


@dataclass(frozen=True)
class TransparencyWindow:
    """Photon-energy interval over which the surrounding medium is transparent
    and yields are workable. Bounds all measurable kinematics."""

    min_ev: float = 1.5
    max_ev: float = 6.0

    def __post_init__(self):
        if not (0.0 < self.min_ev < self.max_ev):
            raise DomainError(
                f"invalid transparency window [{self.min_ev}, {self.max_ev}] eV"
            )

    def contains(self, omega_ev: float) -> bool:
        return self.min_ev <= omega_ev <= self.max_ev


DEFAULT_WINDOW = TransparencyWindow()
