"""Finite-difference Laplace solver on a regular grid.

This is the comparison method: electrodes are rasterized onto the grid
(staircase boundaries and all), the 7-point Laplacian is relaxed by
red-black SOR, and fields come from central differences plus trilinear
interpolation.  Edge effects of the rasterization are the documented
accuracy limit, not a bug to engineer away.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import (NonConvergenceError, PointOutsideGridError, TrapSimError)
from .geometry import TrapGeometry

log = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-7        # volts, max node update per sweep
DEFAULT_MAX_SWEEPS = 200_000
DEFAULT_OMEGA_SOR = 1.9
BOX_FACTOR = 1.5                # grounded box half-extent over trap radius


@dataclass
class PotentialGrid:
    """Solved potential on a uniform grid with Dirichlet (fixed) nodes."""

    origin: np.ndarray
    spacing: float
    values: np.ndarray
    fixed: np.ndarray

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.values.shape

    @property
    def bounds(self) -> np.ndarray:
        """Usable interior for field interpolation, one node margin."""
        lo = self.origin + self.spacing
        hi = self.origin + (np.array(self.dims) - 2) * self.spacing
        return np.stack([lo, hi])

    def axes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return tuple(self.origin[i] + self.spacing * np.arange(self.dims[i])
                     for i in range(3))


@njit(cache=True)
def _sor_color(v, fixed, omega, parity):
    nx, ny, nz = v.shape
    worst = 0.0
    inv6 = 1.0 / 6.0
    for i in range(1, nx - 1):
        for j in range(1, ny - 1):
            k = 1
            if (i + j + k) & 1 != parity:
                k = 2
            while k < nz - 1:
                if not fixed[i, j, k]:
                    avg = (v[i - 1, j, k] + v[i + 1, j, k]
                           + v[i, j - 1, k] + v[i, j + 1, k]
                           + v[i, j, k - 1] + v[i, j, k + 1]) * inv6
                    dv = omega * (avg - v[i, j, k])
                    v[i, j, k] += dv
                    if abs(dv) > worst:
                        worst = abs(dv)
                k += 2
    return worst


@njit(cache=True)
def _sor_run(v, fixed, omega, tol, max_sweeps, hist):
    for s in range(max_sweeps):
        worst = _sor_color(v, fixed, omega, 0)
        w1 = _sor_color(v, fixed, omega, 1)
        if w1 > worst:
            worst = w1
        hist[s] = worst
        if worst < tol:
            return s + 1
    return -max_sweeps


def sor_relax(values: np.ndarray, fixed: np.ndarray, *,
              omega_sor: float = DEFAULT_OMEGA_SOR,
              tolerance: float = DEFAULT_TOLERANCE,
              max_sweeps: int = DEFAULT_MAX_SWEEPS) -> tuple[int, np.ndarray]:
    """Relax a prepared grid in place until the largest update is small.

    ``fixed`` marks Dirichlet nodes (their values are never touched); the
    whole boundary shell must be fixed by the caller.  Returns the sweep
    count and per-sweep max-update history; raises NonConvergenceError
    when the budget runs out.
    """
    if values.shape != fixed.shape or values.ndim != 3:
        raise TrapSimError("values and fixed must be matching 3d arrays")
    if not (0 < omega_sor < 2):
        raise TrapSimError("SOR relaxation factor must lie in (0, 2)")
    if min(values.shape) < 3:
        raise TrapSimError("grid needs at least 3 nodes per axis")
    shell_free = not (fixed[0].all() and fixed[-1].all()
                      and fixed[:, 0].all() and fixed[:, -1].all()
                      and fixed[:, :, 0].all() and fixed[:, :, -1].all())
    if shell_free:
        raise TrapSimError("boundary shell must be fully fixed")
    hist = np.empty(max_sweeps)
    n = _sor_run(values, fixed, omega_sor, tolerance, max_sweeps, hist)
    if n < 0:
        raise NonConvergenceError(
            f"SOR did not reach {tolerance} V in {max_sweeps} sweeps "
            f"(last update {hist[-1]:.3e} V)",
            residual_history=hist[-100:].copy())
    return n, hist[:n].copy()


def _grid_axes(center, half_extent, spacing):
    center = np.broadcast_to(np.asarray(center, dtype=float), 3)
    half = np.broadcast_to(np.asarray(half_extent, dtype=float), 3)
    if spacing <= 0 or np.any(half <= 0):
        raise TrapSimError("spacing and half extents must be positive")
    dims = 2 * np.ceil(half / spacing).astype(int) + 1
    origin = center - (dims - 1) / 2 * spacing
    return origin, dims


def rasterize_electrodes(geometry: TrapGeometry, voltages,
                         origin, spacing: float, dims) -> tuple[np.ndarray, np.ndarray]:
    """Node arrays (values, fixed) with conductors pinned to their volts.

    The outer shell is grounded first; electrode volumes override it.
    A geometry without solid volumes cannot be rasterized.
    """
    v = geometry.voltages(voltages) if not isinstance(voltages, np.ndarray) \
        else voltages
    values = np.zeros(tuple(dims))
    fixed = np.zeros(tuple(dims), dtype=bool)
    for arr in (fixed[0], fixed[-1], fixed[:, 0], fixed[:, -1],
                fixed[:, :, 0], fixed[:, :, -1]):
        arr[:] = True

    xs = origin[0] + spacing * np.arange(dims[0])
    ys = origin[1] + spacing * np.arange(dims[1])
    zs = origin[2] + spacing * np.arange(dims[2])
    gy, gz = np.meshgrid(ys, zs, indexing="ij")
    plane = np.column_stack([np.empty(gy.size), gy.ravel(), gz.ravel()])

    if not any(e.solids for e in geometry.electrodes):
        raise TrapSimError(
            f"geometry '{geometry.name}' has no solid volumes to rasterize")

    # slab by slab keeps the point arrays small
    for ix, x in enumerate(xs):
        plane[:, 0] = x
        for e_idx, electrode in enumerate(geometry.electrodes):
            inside = np.zeros(len(plane), dtype=bool)
            for solid in electrode.solids:
                inside |= solid.contains(plane)
            if inside.any():
                mask = inside.reshape(dims[1], dims[2])
                values[ix][mask] = v[e_idx]
                fixed[ix][mask] = True
    return values, fixed


def solve_grid(geometry: TrapGeometry, voltages, *, spacing: float,
               center=(0.0, 0.0, 0.0), half_extent=None,
               tolerance: float = DEFAULT_TOLERANCE,
               max_sweeps: int = DEFAULT_MAX_SWEEPS,
               omega_sor: float = DEFAULT_OMEGA_SOR) -> PotentialGrid:
    """Solve the Laplace problem for the electrode voltages on a grid.

    The grid is centered on ``center`` and reaches ``half_extent`` per
    axis (default: 1.5x the trap bounding radius, a grounded box at
    three times the trap extent standing in for the vacuum chamber).
    """
    if half_extent is None:
        half_extent = BOX_FACTOR * geometry.bounding_radius
    origin, dims = _grid_axes(center, half_extent, spacing)
    values, fixed = rasterize_electrodes(geometry, voltages, origin,
                                         spacing, dims)
    if fixed.all():
        raise TrapSimError("grid is entirely inside conductors")
    sweeps, hist = sor_relax(values, fixed, omega_sor=omega_sor,
                             tolerance=tolerance, max_sweeps=max_sweeps)
    log.info("SOR converged in %d sweeps on %s grid", sweeps, tuple(dims))
    return PotentialGrid(origin=origin, spacing=spacing, values=values,
                         fixed=fixed)


@njit(cache=True)
def _field_point(v, ox, oy, oz, inv_h, x, y, z, out):
    nx, ny, nz = v.shape
    fx = (x - ox) * inv_h
    fy = (y - oy) * inv_h
    fz = (z - oz) * inv_h
    ix = int(math.floor(fx))
    iy = int(math.floor(fy))
    iz = int(math.floor(fz))
    # central differences at the 8 cell nodes need one extra node layer
    if ix < 1 or ix > nx - 3 or iy < 1 or iy > ny - 3 or iz < 1 or iz > nz - 3:
        return 1
    tx = fx - ix
    ty = fy - iy
    tz = fz - iz
    ex = ey = ez = 0.0
    for a in range(2):
        wx = (1.0 - tx) if a == 0 else tx
        for b in range(2):
            wy = (1.0 - ty) if b == 0 else ty
            for c in range(2):
                wz = (1.0 - tz) if c == 0 else tz
                w = wx * wy * wz
                i, j, k = ix + a, iy + b, iz + c
                ex -= w * (v[i + 1, j, k] - v[i - 1, j, k])
                ey -= w * (v[i, j + 1, k] - v[i, j - 1, k])
                ez -= w * (v[i, j, k + 1] - v[i, j, k - 1])
    half_inv = 0.5 * inv_h
    out[0] = ex * half_inv
    out[1] = ey * half_inv
    out[2] = ez * half_inv
    return 0


@njit(cache=True)
def _field_many(v, ox, oy, oz, inv_h, pts, out):
    buf = np.empty(3)
    for n in range(pts.shape[0]):
        if _field_point(v, ox, oy, oz, inv_h, pts[n, 0], pts[n, 1],
                        pts[n, 2], buf) != 0:
            return n
        out[n, 0] = buf[0]
        out[n, 1] = buf[1]
        out[n, 2] = buf[2]
    return -1


def interpolate_field(grid: PotentialGrid, points) -> np.ndarray:
    """E = -grad(phi): central differences, trilinear between nodes.

    Exact for linear potentials; points must stay one node away from
    the grid faces.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.empty((len(pts), 3))
    bad = _field_many(grid.values, grid.origin[0], grid.origin[1],
                      grid.origin[2], 1.0 / grid.spacing, pts, out)
    if bad >= 0:
        raise PointOutsideGridError(
            f"point {pts[bad]} outside the usable grid interior")
    return out


def interpolate_potential(grid: PotentialGrid, points) -> np.ndarray:
    """Trilinear potential lookup at interior points."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    f = (pts - grid.origin) / grid.spacing
    idx = np.floor(f).astype(int)
    hi = np.array(grid.dims) - 2
    if np.any(idx < 0) or np.any(idx > hi):
        raise PointOutsideGridError("point outside the grid")
    t = f - idx
    v = grid.values
    out = np.zeros(len(pts))
    for a in range(2):
        wx = t[:, 0] if a else 1.0 - t[:, 0]
        for b in range(2):
            wy = t[:, 1] if b else 1.0 - t[:, 1]
            for c in range(2):
                wz = t[:, 2] if c else 1.0 - t[:, 2]
                out += wx * wy * wz * v[idx[:, 0] + a, idx[:, 1] + b,
                                        idx[:, 2] + c]
    return out


class FdmDriveField:
    """Drive-field provider backed by up to three solved grids.

    The static, cosine and sine voltage parts each get their own Laplace
    solve; an all-zero part skips the solve and contributes nothing.
    """

    def __init__(self, grids, omega: float):
        self.grid_a, self.grid_b, self.grid_c = grids
        self.omega = omega

    @property
    def rf_omega(self) -> float:
        return self.omega

    @classmethod
    def solve(cls, geometry: TrapGeometry, drive, **grid_kw) -> "FdmDriveField":
        parts = drive.cos_parts()
        grids = []
        for vec in parts:
            if np.any(vec != 0.0):
                grids.append(solve_grid(geometry, np.asarray(vec, dtype=float),
                                        **grid_kw))
            else:
                grids.append(None)
        return cls(grids, drive.rf_omega)

    def _eval(self, grid, points):
        if grid is None:
            return np.zeros((len(np.atleast_2d(points)), 3))
        return interpolate_field(grid, points)

    def drive_parts(self, points):
        return (self._eval(self.grid_a, points),
                self._eval(self.grid_b, points),
                self._eval(self.grid_c, points))

    def fields(self, points, t: float):
        a, b, c = self.drive_parts(points)
        return a + b * math.cos(self.omega * t) + c * math.sin(self.omega * t)

    def potential(self, points, t: float):
        phis = []
        for grid, w in ((self.grid_a, 1.0),
                        (self.grid_b, math.cos(self.omega * t)),
                        (self.grid_c, math.sin(self.omega * t))):
            if grid is not None:
                phis.append(w * interpolate_potential(grid, points))
        if not phis:
            return np.zeros(len(np.atleast_2d(points)))
        return sum(phis)
