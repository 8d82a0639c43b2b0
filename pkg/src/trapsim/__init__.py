"""Miniature RF ion trap simulator.

Field solutions (boundary-element or finite-difference), Mathieu stability
analysis, full RF trajectory integration, secular-frequency extraction and
Johnson-noise heating estimates for small Paul traps.
"""

__version__ = "0.1.0"

from .constants import (ATOMIC_MASS, BOLTZMANN, ELEMENTARY_CHARGE, EPSILON_0,
                        HBAR)
from .errors import (ConfigError, GeometryError, SolverError, TrapSimError,
                     UnstableParametersError)
from .geometry import (EndcapTrapParams, IdealQuadrupoleParams,
                       LinearTrapParams, TrapGeometry, build_ideal_quadrupole,
                       build_innsbruck_linear, build_npl_endcap)
from .bem import (BemDriveField, ChargeBasis, DriveWaveform, field_at,
                  potential_at, solve_charge_basis)
from .fieldcache import FieldCache, build_field_cache, default_cache_box
from .fdm import PotentialGrid, interpolate_field, solve_grid
from .mathieu import (CA40, SR88, IonSpecies, StabilityParams, beta_dehmelt,
                      beta_floquet, beta_fourth_order,
                      endcap_stability_params, linear_stability_params,
                      secular_frequencies, species_by_name)
from .dynamics import (IonState, Trajectory, initial_state_from_energy,
                       integrate_trajectory)
from .spectral import (Spectrum, axis_spectrum, extract_secular_frequency,
                       power_spectrum)
from .heating import HeatingInputs, johnson_heating_rate, skin_depth
from .config import Scenario, load_scenario, parse_scenario, save_scenario
from .runner import (Report, compare_methods, export_potential_map,
                     run_scenario)
