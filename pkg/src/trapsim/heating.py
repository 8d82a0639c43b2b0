"""Johnson-noise motional heating from electrode resistance.

The rate model is ndot = e^2 k T R / (m z^2 hbar w); the resistance of
the actual noise path (leads, contacts, skin effect) is rarely derivable
from drawings, so R stays a user input and electrode_resistance() only
offers the two textbook conventions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .constants import BOLTZMANN, HBAR, MU_0
from .errors import TrapSimError
from .mathieu import IonSpecies

ROOM_TEMPERATURE = 300.0


@dataclass(frozen=True)
class HeatingInputs:
    """Inputs to the heating-rate formula; z is ion-electrode distance."""

    resistance: float
    distance: float
    omega_u: float
    species: IonSpecies
    temperature: float = ROOM_TEMPERATURE

    def __post_init__(self):
        if self.resistance < 0:
            raise TrapSimError("resistance must be non-negative")
        for name in ("distance", "omega_u", "temperature"):
            if getattr(self, name) <= 0:
                raise TrapSimError(f"{name} must be positive")


def skin_depth(resistivity: float, frequency: float) -> float:
    """delta = sqrt(2 rho / (mu0 * 2 pi f)) for a good conductor."""
    if resistivity <= 0 or frequency <= 0:
        raise TrapSimError("resistivity and frequency must be positive")
    return math.sqrt(2.0 * resistivity / (MU_0 * 2.0 * math.pi * frequency))


def electrode_resistance(resistivity: float, length: float,
                         cross_section_area: float,
                         skin_frequency: float | None = None) -> float:
    """R = rho L / A, optionally with the skin-effect area correction.

    With ``skin_frequency`` set, the cross section is replaced by
    perimeter x skin depth (circular conductor assumed) whenever the
    skin depth is smaller than the conductor radius.
    """
    if resistivity <= 0 or cross_section_area <= 0:
        raise TrapSimError("resistivity and area must be positive")
    if length < 0:
        raise TrapSimError("length must be non-negative")
    area = cross_section_area
    if skin_frequency is not None:
        radius = math.sqrt(cross_section_area / math.pi)
        delta = skin_depth(resistivity, skin_frequency)
        if delta < radius:
            area = 2.0 * math.pi * radius * delta
    return resistivity * length / area


def johnson_heating_rate(inputs: HeatingInputs) -> float:
    """Mean phonon gain in quanta per second."""
    q = inputs.species.charge
    return (q * q * BOLTZMANN * inputs.temperature * inputs.resistance
            / (inputs.species.mass * inputs.distance ** 2
               * HBAR * inputs.omega_u))


def seconds_per_quantum(inputs: HeatingInputs) -> float:
    """Inverse rate; infinity for a lossless electrode."""
    rate = johnson_heating_rate(inputs)
    return math.inf if rate == 0.0 else 1.0 / rate
