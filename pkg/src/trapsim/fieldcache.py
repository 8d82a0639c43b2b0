"""Regular-grid cache of drive-field components with tricubic interpolation.

The electric field of any drive decomposes as

    E(r, t) = A(r) + B(r) cos(w t) + C(r) sin(w t)

so nine scalar grids capture the full time dependence.  Interpolation
uses the cubic-convolution (Catmull-Rom) kernel, which reproduces
quadratic fields exactly; an ideal quadrupole therefore caches to
machine precision.  The usable region excludes one guard layer of nodes
on every face.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import PointOutsideGridError, SolverError

log = logging.getLogger(__name__)

DEFAULT_NODES = 33              # grid nodes per axis
DEFAULT_TOLERANCE = 1.0e-3      # max relative field mismatch vs provider
VERIFY_SAMPLES = 128


@njit(cache=True)
def _cr_weights(t, w):
    # Keys' cubic-convolution kernel, a = -1/2
    t2 = t * t
    t3 = t2 * t
    w[0] = 0.5 * (-t3 + 2.0 * t2 - t)
    w[1] = 0.5 * (3.0 * t3 - 5.0 * t2 + 2.0)
    w[2] = 0.5 * (-3.0 * t3 + 4.0 * t2 + t)
    w[3] = 0.5 * (t3 - t2)


@njit(cache=True)
def _eval_point(values, origin, inv_h, x, y, z, out):
    """Tricubic interpolation of all channels at one point.

    Returns 0 on success, 1 when the point leaves the usable box.
    ``values`` has shape (nx, ny, nz, nc); ``out`` has length nc.
    """
    nx, ny, nz, nc = values.shape
    fx = (x - origin[0]) * inv_h[0]
    fy = (y - origin[1]) * inv_h[1]
    fz = (z - origin[2]) * inv_h[2]
    ix = int(np.floor(fx))
    iy = int(np.floor(fy))
    iz = int(np.floor(fz))
    # stencil needs i-1 .. i+2
    if ix < 1 or ix > nx - 3 or iy < 1 or iy > ny - 3 or iz < 1 or iz > nz - 3:
        return 1
    wx = np.empty(4)
    wy = np.empty(4)
    wz = np.empty(4)
    _cr_weights(fx - ix, wx)
    _cr_weights(fy - iy, wy)
    _cr_weights(fz - iz, wz)
    for c in range(nc):
        out[c] = 0.0
    for a in range(4):
        ia = ix - 1 + a
        for b in range(4):
            jb = iy - 1 + b
            wab = wx[a] * wy[b]
            for d in range(4):
                kd = iz - 1 + d
                w = wab * wz[d]
                for c in range(nc):
                    out[c] += w * values[ia, jb, kd, c]
    return 0


@njit(cache=True)
def _eval_many(values, origin, inv_h, points, out):
    buf = np.empty(values.shape[3])
    for i in range(points.shape[0]):
        st = _eval_point(values, origin, inv_h,
                         points[i, 0], points[i, 1], points[i, 2], buf)
        if st != 0:
            return i
        out[i, :] = buf
    return -1


@dataclass
class FieldCache:
    """Nine-channel field grid: channels 0-2 = A, 3-5 = B, 6-8 = C."""

    origin: np.ndarray
    spacing: np.ndarray
    values: np.ndarray
    omega: float
    max_rel_error: float = 0.0
    source: str = ""

    @property
    def rf_omega(self) -> float:
        return self.omega

    @property
    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Usable (lo, hi) corners, one guard layer inside the grid."""
        dims = np.array(self.values.shape[:3])
        lo = self.origin + self.spacing
        hi = self.origin + (dims - 2) * self.spacing
        return lo, hi

    def drive_parts(self, points):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.empty((points.shape[0], 9))
        bad = _eval_many(self.values, self.origin, 1.0 / self.spacing,
                         points, out)
        if bad >= 0:
            raise PointOutsideGridError(
                f"point {points[bad]} outside cached region")
        return out[:, 0:3], out[:, 3:6], out[:, 6:9]

    def fields(self, points, t: float):
        a, b, c = self.drive_parts(points)
        return a + b * np.cos(self.omega * t) + c * np.sin(self.omega * t)

    def contains(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        lo, hi = self.bounds
        return np.all((points >= lo) & (points <= hi), axis=1)


def _node_axes(center, half_extent, nodes):
    center = np.broadcast_to(np.asarray(center, dtype=float), 3).copy()
    half = np.broadcast_to(np.asarray(half_extent, dtype=float), 3).copy()
    dims = np.broadcast_to(np.asarray(nodes, dtype=int), 3).copy()
    if np.any(half <= 0):
        raise ValueError("cache half extent must be positive")
    if np.any(dims < 8):
        raise ValueError("cache needs at least 8 nodes per axis")
    # usable box = center +- half; one guard node beyond each face
    spacing = 2.0 * half / (dims - 3)
    origin = center - half - spacing
    return origin, spacing, dims


def build_field_cache(provider, center, half_extent,
                      nodes=DEFAULT_NODES,
                      tolerance: float = DEFAULT_TOLERANCE,
                      verify: bool = True,
                      seed: int = 1) -> FieldCache:
    """Sample ``provider.drive_parts`` on a grid and verify the fit.

    Parameters
    ----------
    provider : object with ``drive_parts(points)`` and ``rf_omega``
        Direct field evaluator (BEM superposition, FDM grids, analytic).
    center, half_extent : array_like
        Usable box is ``center +- half_extent`` per axis (scalars
        broadcast).
    nodes : int or (3,) ints
        Grid nodes per axis including the guard layers.
    tolerance : float
        Maximum allowed relative mismatch |E_cache - E_direct| against
        the direct evaluation, measured at random interior points.
        Exceeding it raises ``SolverError``.

    Returns
    -------
    FieldCache
    """
    origin, spacing, dims = _node_axes(center, half_extent, nodes)
    xs = origin[0] + spacing[0] * np.arange(dims[0])
    ys = origin[1] + spacing[1] * np.arange(dims[1])
    zs = origin[2] + spacing[2] * np.arange(dims[2])
    gx, gy, gz = np.meshgrid(xs, ys, zs, indexing="ij")
    pts = np.column_stack([gx.ravel(), gy.ravel(), gz.ravel()])

    t0 = time.perf_counter()
    a, b, c = provider.drive_parts(pts)
    values = np.concatenate([a, b, c], axis=1).reshape(*dims, 9)
    values = np.ascontiguousarray(values)
    cache = FieldCache(origin=origin, spacing=spacing, values=values,
                       omega=float(provider.rf_omega),
                       source=type(provider).__name__)
    log.info("field cache %s nodes sampled in %.1f s",
             tuple(int(d) for d in dims), time.perf_counter() - t0)

    if verify:
        rng = np.random.default_rng(seed)
        lo, hi = cache.bounds
        span = hi - lo
        sample = lo + rng.random((VERIFY_SAMPLES, 3)) * span
        ca, cb, cc = cache.drive_parts(sample)
        da, db, dc = provider.drive_parts(sample)
        got = np.concatenate([ca, cb, cc], axis=1)
        want = np.concatenate([da, db, dc], axis=1)
        scale = np.max(np.linalg.norm(want.reshape(-1, 3), axis=1))
        if scale == 0.0:
            cache.max_rel_error = 0.0
            return cache
        err = np.linalg.norm((got - want).reshape(-1, 3), axis=1)
        ref = np.linalg.norm(want.reshape(-1, 3), axis=1) + 1.0e-3 * scale
        cache.max_rel_error = float(np.max(err / ref))
        if cache.max_rel_error > tolerance:
            raise SolverError(
                f"field cache mismatch {cache.max_rel_error:.2e} exceeds "
                f"tolerance {tolerance:.2e}; refine the grid")
    return cache


def default_cache_box(geometry) -> np.ndarray:
    """Half extents used when a scenario does not set a cache box.

    Axial extent is 0.3 z0; radial extents are capped at 0.5 r0 so the
    box stays clear of the electrodes of wide-aspect traps.
    """
    z0 = geometry.z0 if geometry.z0 is not None else geometry.bounding_radius / 3.0
    axial = 0.3 * z0
    radial = axial if geometry.r0 is None else min(axial, 0.5 * geometry.r0)
    return np.array([radial, radial, axial])
