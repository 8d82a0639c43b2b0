"""Exception hierarchy.

The CLI maps these onto process exit codes: configuration problems exit
with 2, numerical solver failures with 3 and a lost ion with 4.
"""


class TrapSimError(Exception):
    """Base class for all simulator errors."""


class ConfigError(TrapSimError):
    """Invalid scenario file, units, or parameter combination."""


class GeometryError(ConfigError):
    """Electrode dimensions that cannot be meshed (overlaps, bad sizes)."""


class SolverError(TrapSimError):
    """Numerical failure inside a field solver or integrator."""


class SingularMatrixError(SolverError):
    """Influence matrix factorisation hit a (near) zero pivot."""

    def __init__(self, message, panel_index=None):
        super().__init__(message)
        self.panel_index = panel_index


class OverlappingPanelsError(SolverError):
    """Two panels share a collocation point."""

    def __init__(self, message, pairs=()):
        super().__init__(message)
        self.pairs = list(pairs)


class NonConvergenceError(SolverError):
    """Iterative solve stopped before reaching tolerance."""

    def __init__(self, message, residual_history=()):
        super().__init__(message)
        self.residual_history = list(residual_history)


class EvaluationError(SolverError):
    """Field or potential requested at an unusable location."""


class PointOutsideGridError(EvaluationError):
    """Interpolation requested outside the solved grid interior."""


class UnstableParametersError(TrapSimError):
    """Mathieu parameters outside the stability region."""


class NonFiniteStateError(SolverError):
    """Integrator produced NaN or Inf."""

    def __init__(self, message, last_state=None):
        super().__init__(message)
        self.last_state = last_state


class IonLostError(TrapSimError):
    """Trajectory left the simulation volume."""


class PeakExtractionError(TrapSimError):
    """No usable spectral peak in the requested band."""
