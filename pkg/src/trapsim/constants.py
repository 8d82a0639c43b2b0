"""Physical constants (SI, CODATA 2018) used throughout the simulator."""

import math

EPSILON_0 = 8.8541878128e-12    # vacuum permittivity [F/m]
MU_0 = 1.25663706212e-6         # vacuum permeability [H/m]
ELEMENTARY_CHARGE = 1.602176634e-19   # [C]
ATOMIC_MASS = 1.66053906660e-27       # unified atomic mass unit [kg]
BOLTZMANN = 1.380649e-23        # [J/K]
HBAR = 1.054571817e-34          # reduced Planck constant [J s]
ELECTRON_VOLT = ELEMENTARY_CHARGE     # [J]

COULOMB_K = 1.0 / (4.0 * math.pi * EPSILON_0)   # [m/F]

# Isotope masses of the two species used in the reference geometries [u].
MASS_SR88_U = 87.9056
MASS_CA40_U = 39.9626
