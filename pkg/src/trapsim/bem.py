"""Boundary-element field solver.

Constant charge density per panel, collocated at panel centroids.  The
off-diagonal influence of panel j on point i is A_j / (4 pi eps0 r_ij);
when the separation is under twice the source panel diameter the panel is
replaced by its fixed 4-point subdivision.  The self term is the centre
potential of the equal-area flat disc, sqrt(A/pi) / (2 eps0).

Solving M sigma = V once per electrode (unit volts on one electrode,
ground elsewhere) yields a charge basis; any drive is then a superposition
of those basis solutions.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .constants import COULOMB_K, EPSILON_0
from .errors import EvaluationError, OverlappingPanelsError, SingularMatrixError
from .geometry import TrapGeometry

log = logging.getLogger(__name__)

_NEAR_FACTOR = 2.0          # subdivide sources closer than this many diameters
_ROW_CHUNK = 256


@dataclass
class InfluenceMatrix:
    """Dense collocation matrix mapping panel charge densities to volts."""

    matrix: np.ndarray

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def _near_kernel(points: np.ndarray, jj: np.ndarray, sub_c: np.ndarray,
                 sub_a: np.ndarray) -> np.ndarray:
    """Potential kernel of subdivided panels jj as seen from points."""
    d = points[:, None, :] - sub_c[jj]
    r = np.linalg.norm(d, axis=2)
    return COULOMB_K * (sub_a[jj] / r).sum(axis=1)


def _near_field_kernel(points: np.ndarray, jj: np.ndarray, sub_c: np.ndarray,
                       sub_a: np.ndarray) -> np.ndarray:
    d = points[:, None, :] - sub_c[jj]
    r = np.linalg.norm(d, axis=2)
    return COULOMB_K * np.einsum("mk,mkc->mc", sub_a[jj] / r ** 3, d)


def assemble_influence_matrix(geometry: TrapGeometry) -> InfluenceMatrix:
    """Build the dense panel-to-panel potential matrix.

    Raises OverlappingPanelsError when two collocation points coincide.
    """
    c = geometry.centroids
    a = geometry.areas
    diam = geometry.diameters
    n = geometry.n_panels
    m = np.empty((n, n))
    near_cut = _NEAR_FACTOR * diam[None, :]

    for i0 in range(0, n, _ROW_CHUNK):
        i1 = min(i0 + _ROW_CHUNK, n)
        d = c[i0:i1, None, :] - c[None, :, :]
        r = np.linalg.norm(d, axis=2)

        rows = np.arange(i0, i1)
        r_check = r.copy()
        r_check[rows - i0, rows] = np.inf
        bad = r_check < 1e-12
        if np.any(bad):
            ii, jj = np.nonzero(bad)
            pairs = [(int(i + i0), int(j)) for i, j in zip(ii, jj)]
            raise OverlappingPanelsError(
                f"coincident collocation points, e.g. panels {pairs[0]}", pairs)

        with np.errstate(divide="ignore"):
            block = COULOMB_K * a[None, :] / r
        near = r_check < near_cut
        ii, jj = np.nonzero(near)
        if len(ii):
            block[ii, jj] = _near_kernel(c[ii + i0], jj, geometry.sub_centroids,
                                         geometry.sub_areas)
        block[rows - i0, rows] = np.sqrt(a[rows] / np.pi) / (2.0 * EPSILON_0)
        m[i0:i1] = block

    if not np.all(np.isfinite(m)):
        raise OverlappingPanelsError("influence matrix has non-finite entries")
    return InfluenceMatrix(m)


@dataclass
class ChargeBasis:
    """Per-electrode unit-voltage charge densities on every panel."""

    geometry: TrapGeometry
    sigma: np.ndarray           # (n_panels, n_electrodes)
    residual: float             # max |M sigma - rhs| over all basis columns

    def charges(self, voltages) -> np.ndarray:
        """Total charge on each electrode for the given voltage vector."""
        v = np.asarray(voltages, dtype=float)
        dens = self.sigma @ v
        return np.bincount(self.geometry.electrode_index,
                           weights=dens * self.geometry.areas,
                           minlength=self.geometry.n_electrodes)


def solve_charge_basis(geometry: TrapGeometry,
                       influence: InfluenceMatrix | None = None) -> ChargeBasis:
    """LU-factorise the influence matrix and solve one column per electrode."""
    if influence is None:
        influence = assemble_influence_matrix(geometry)
    m = influence.matrix
    rhs = np.zeros((geometry.n_panels, geometry.n_electrodes))
    for e in range(geometry.n_electrodes):
        rhs[geometry.electrode_index == e, e] = 1.0

    lu, piv = scipy.linalg.lu_factor(m)
    pivots = np.abs(np.diag(lu))
    if pivots.min() < 1e-14 * pivots.max():
        idx = int(np.argmin(pivots))
        raise SingularMatrixError(
            f"influence matrix is numerically singular (pivot {idx}); "
            "check for duplicated or degenerate panels", panel_index=idx)
    sigma = scipy.linalg.lu_solve((lu, piv), rhs)
    residual = float(np.abs(m @ sigma - rhs).max())
    log.debug("charge basis: %d panels, %d electrodes, residual %.3e",
              geometry.n_panels, geometry.n_electrodes, residual)
    return ChargeBasis(geometry, sigma, residual)


# ---------------------------------------------------------------------------
# evaluation


def basis_potentials(basis: ChargeBasis, points) -> np.ndarray:
    """Potential of each unit-voltage electrode basis at points -> (P, E)."""
    geom = basis.geometry
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.empty((len(pts), geom.n_electrodes))
    for p0 in range(0, len(pts), _ROW_CHUNK):
        p1 = min(p0 + _ROW_CHUNK, len(pts))
        kern = _potential_kernel(geom, pts[p0:p1])
        out[p0:p1] = kern @ basis.sigma
    return out


def basis_fields(basis: ChargeBasis, points) -> np.ndarray:
    """Field of each unit-voltage electrode basis at points -> (P, E, 3)."""
    geom = basis.geometry
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.empty((len(pts), geom.n_electrodes, 3))
    for p0 in range(0, len(pts), _ROW_CHUNK):
        p1 = min(p0 + _ROW_CHUNK, len(pts))
        kern = _field_kernel(geom, pts[p0:p1])
        out[p0:p1] = np.einsum("pnc,ne->pec", kern, basis.sigma)
    return out


def _potential_kernel(geom: TrapGeometry, pts: np.ndarray) -> np.ndarray:
    d = pts[:, None, :] - geom.centroids[None, :, :]
    r = np.linalg.norm(d, axis=2)
    on_surface = r < 1e-9 * geom.diameters[None, :]
    with np.errstate(divide="ignore"):
        kern = COULOMB_K * geom.areas[None, :] / r
    near = (r < _NEAR_FACTOR * geom.diameters[None, :]) & ~on_surface
    ii, jj = np.nonzero(near)
    if len(ii):
        kern[ii, jj] = _near_kernel(pts[ii], jj, geom.sub_centroids, geom.sub_areas)
    ii, jj = np.nonzero(on_surface)
    if len(ii):
        # collocation self term: the point sits on panel jj
        kern[ii, jj] = np.sqrt(geom.areas[jj] / np.pi) / (2.0 * EPSILON_0)
    if not np.all(np.isfinite(kern)):
        raise EvaluationError("potential requested exactly on a panel quadrature node")
    return kern


def _field_kernel(geom: TrapGeometry, pts: np.ndarray) -> np.ndarray:
    d = pts[:, None, :] - geom.centroids[None, :, :]
    r = np.linalg.norm(d, axis=2)
    if np.any(r < 1e-9 * geom.diameters[None, :]):
        raise EvaluationError("field requested on a conductor surface")
    kern = COULOMB_K * (geom.areas[None, :] / r ** 3)[:, :, None] * d
    near = r < _NEAR_FACTOR * geom.diameters[None, :]
    ii, jj = np.nonzero(near)
    if len(ii):
        kern[ii, jj] = _near_field_kernel(pts[ii], jj, geom.sub_centroids,
                                          geom.sub_areas)
    if not np.all(np.isfinite(kern)):
        raise EvaluationError("field requested exactly on a panel quadrature node")
    return kern


def _check_inside(geom: TrapGeometry, pts: np.ndarray) -> None:
    if not any(e.solids for e in geom.electrodes):
        return
    idx = geom.containing_electrode(pts)
    n_inside = int((idx >= 0).sum())
    if n_inside:
        log.warning("%d of %d evaluation points lie inside a conductor volume",
                    n_inside, len(pts))


def potential_at(basis: ChargeBasis, points, voltages, *,
                 check_inside: bool = True) -> np.ndarray:
    """Electric potential (volts) at points for the given electrode volts."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if check_inside:
        _check_inside(basis.geometry, pts)
    v = np.asarray(voltages, dtype=float)
    return basis_potentials(basis, pts) @ v


def field_at(basis: ChargeBasis, points, voltages, *,
             check_inside: bool = True) -> np.ndarray:
    """Electric field (V/m) at points for the given electrode volts."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if check_inside:
        _check_inside(basis.geometry, pts)
    v = np.asarray(voltages, dtype=float)
    return np.einsum("pec,e->pc", basis_fields(basis, pts), v)


# ---------------------------------------------------------------------------
# drives


@dataclass(frozen=True)
class DriveWaveform:
    """Per-electrode voltage programme U + V cos(omega t + phase)."""

    dc: np.ndarray              # (E,) volts
    amplitude: np.ndarray       # (E,) volts, zero to peak
    omega: np.ndarray           # (E,) rad/s
    phase: np.ndarray           # (E,) rad

    def __post_init__(self):
        e = len(self.dc)
        for name in ("amplitude", "omega", "phase"):
            if len(getattr(self, name)) != e:
                raise ValueError("drive arrays must share one length")

    @classmethod
    def for_geometry(cls, geometry: TrapGeometry, *, dc=None, ac=None,
                     frequency: float = 0.0, phase=None) -> "DriveWaveform":
        """Build from name->volts mappings; frequency in Hz is shared."""
        e = geometry.n_electrodes
        dc_v = geometry.voltages(dc or {})
        ac_v = geometry.voltages(ac or {})
        ph = geometry.voltages(phase or {})
        om = np.where(ac_v != 0.0, 2.0 * np.pi * frequency, 0.0)
        return cls(dc_v, ac_v, om, ph)

    @property
    def rf_omega(self) -> float:
        """The single angular drive frequency; 0 for a purely static drive."""
        active = self.omega[self.amplitude != 0.0]
        if len(active) == 0:
            return 0.0
        vals = np.unique(active)
        if len(vals) > 1:
            raise ValueError(f"mixed drive frequencies {vals} are not supported")
        return float(vals[0])

    def voltages(self, t: float) -> np.ndarray:
        return self.dc + self.amplitude * np.cos(self.omega * t + self.phase)

    def cos_parts(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Voltage vectors (static, cos, sin) with cos(wt+p) expanded."""
        return (self.dc,
                self.amplitude * np.cos(self.phase),
                -self.amplitude * np.sin(self.phase))


def instantaneous_voltages(drive: DriveWaveform, t: float) -> np.ndarray:
    """Electrode voltages at time t."""
    return drive.voltages(t)


class BemDriveField:
    """Time-dependent field provider combining a charge basis and a drive."""

    def __init__(self, basis: ChargeBasis, drive: DriveWaveform):
        self.basis = basis
        self.drive = drive

    @property
    def rf_omega(self) -> float:
        return self.drive.rf_omega

    def field(self, points, t: float) -> np.ndarray:
        return field_at(self.basis, points, self.drive.voltages(t),
                        check_inside=False)

    def potential(self, points, t: float) -> np.ndarray:
        return potential_at(self.basis, points, self.drive.voltages(t),
                            check_inside=False)

    def drive_parts(self, points) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Field components (static, cos, sin): E = A + B cos wt + C sin wt."""
        f = basis_fields(self.basis, points)
        v_dc, v_cos, v_sin = self.drive.cos_parts()
        return (np.einsum("pec,e->pc", f, v_dc),
                np.einsum("pec,e->pc", f, v_cos),
                np.einsum("pec,e->pc", f, v_sin))
