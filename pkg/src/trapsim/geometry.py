"""Electrode geometry: surface panels for the boundary-element solver and
solid volumes for rasterisation onto finite-difference grids.

All meshers work in SI metres.  Surfaces of revolution are generated about
the z axis from an (r, z) profile polyline; closed profiles traversed
counter-clockwise in the (r, z) plane produce outward-pointing normals.
Panel areas are the exact areas of the revolved chord profile, so the
summed area of a meshed surface matches the true surface area to the
profile-chord error only.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import GeometryError

# ---------------------------------------------------------------------------
# panels


@dataclass(frozen=True)
class Panel:
    """A flat (or mildly warped) surface patch carrying constant charge.

    The collocation point is the arithmetic mean of the vertices.  ``area``
    is the physical patch area, which for curved surfaces is supplied by the
    mesher rather than recomputed from the flattened polygon.
    """

    vertices: np.ndarray        # (3, 3) or (4, 3)
    centroid: np.ndarray        # (3,)
    area: float
    normal: np.ndarray          # (3,) unit
    electrode: int = -1

    @property
    def diameter(self) -> float:
        v = self.vertices
        d = 0.0
        for i in range(len(v)):
            for j in range(i + 1, len(v)):
                d = max(d, float(np.linalg.norm(v[i] - v[j])))
        return d


def _fan_area_normal(verts: np.ndarray) -> tuple[float, np.ndarray]:
    """Area and unit normal of a 3- or 4-vertex polygon (fan triangulation)."""
    if len(verts) == 3:
        n = np.cross(verts[1] - verts[0], verts[2] - verts[0])
        area = 0.5 * np.linalg.norm(n)
    else:
        n = np.cross(verts[2] - verts[0], verts[3] - verts[1])
        a1 = 0.5 * np.linalg.norm(np.cross(verts[1] - verts[0], verts[2] - verts[0]))
        a2 = 0.5 * np.linalg.norm(np.cross(verts[2] - verts[0], verts[3] - verts[0]))
        area = a1 + a2
    nrm = np.linalg.norm(n)
    if nrm == 0.0:
        raise GeometryError("degenerate panel with zero area")
    return float(area), n / nrm


def make_panel(vertices, electrode: int = -1, area: float | None = None) -> Panel:
    """Build a panel from 3 or 4 vertices given in winding order.

    The normal follows the right-hand rule on the winding.  ``area``
    overrides the flat polygon area when the patch approximates a curved
    surface.
    """
    verts = np.asarray(vertices, dtype=float)
    if verts.shape not in ((3, 3), (4, 3)):
        raise GeometryError(f"panel needs 3 or 4 vertices, got shape {verts.shape}")
    flat_area, normal = _fan_area_normal(verts)
    if area is None:
        area = flat_area
    if not (area > 0.0) or not np.isfinite(area):
        raise GeometryError("panel area must be positive and finite")
    return Panel(verts, verts.mean(axis=0), float(area), normal, electrode)


def graded_points(a: float, b: float, n: int, growth: float = 1.0) -> np.ndarray:
    """n+1 points from a to b with geometrically growing segment lengths.

    growth > 1 clusters points near ``a``; growth < 1 near ``b``.
    """
    if n < 1:
        raise GeometryError("need at least one segment")
    if growth == 1.0:
        return np.linspace(a, b, n + 1)
    ratios = growth ** np.arange(n)
    t = np.concatenate(([0.0], np.cumsum(ratios))) / ratios.sum()
    return a + (b - a) * t


# ---------------------------------------------------------------------------
# surface meshers


def revolve_profile(profile, n_circ: int, electrode: int = -1,
                    phi0: float = 0.0) -> list[Panel]:
    """Revolve an (r, z) polyline about the z axis into quad panels.

    Profile points with r = 0 collapse their ring into pole triangles.
    Panel areas are the exact frustum areas of each revolved chord, i.e.
    pi*(r1+r2)*slant/n_circ, so they carry no circumferential chord deficit.
    """
    prof = np.asarray(profile, dtype=float)
    if prof.ndim != 2 or prof.shape[1] != 2:
        raise GeometryError("profile must be an (M, 2) array of (r, z)")
    if np.any(prof[:, 0] < -1e-15):
        raise GeometryError("profile radii must be non-negative")
    if n_circ < 3:
        raise GeometryError("need at least 3 circumferential panels")

    phis = phi0 + np.linspace(0.0, 2.0 * math.pi, n_circ + 1)
    cos_p, sin_p = np.cos(phis), np.sin(phis)
    panels: list[Panel] = []
    for (r1, z1), (r2, z2) in zip(prof[:-1], prof[1:]):
        slant = math.hypot(r2 - r1, z2 - z1)
        if slant < 1e-15:
            continue
        if r1 < 1e-12 and r2 < 1e-12:
            continue    # segment on the axis sweeps no area
        area = math.pi * (r1 + r2) * slant / n_circ
        for k in range(n_circ):
            ca, sa, cb, sb = cos_p[k], sin_p[k], cos_p[k + 1], sin_p[k + 1]
            if r1 < 1e-12:
                verts = [(0.0, 0.0, z1),
                         (r2 * cb, r2 * sb, z2),
                         (r2 * ca, r2 * sa, z2)]
            elif r2 < 1e-12:
                verts = [(r1 * ca, r1 * sa, z1),
                         (r1 * cb, r1 * sb, z1),
                         (0.0, 0.0, z2)]
            else:
                verts = [(r1 * ca, r1 * sa, z1),
                         (r1 * cb, r1 * sb, z1),
                         (r2 * cb, r2 * sb, z2),
                         (r2 * ca, r2 * sa, z2)]
            panels.append(make_panel(verts, electrode, area=area))
    return panels


def mesh_cylinder(radius, z_min, z_max, n_axial, n_circ, *, outward=True,
                  growth=1.0, electrode=-1) -> list[Panel]:
    """Lateral surface of a circular cylinder about the z axis."""
    if radius <= 0 or z_max <= z_min:
        raise GeometryError("cylinder needs radius > 0 and z_max > z_min")
    zs = graded_points(z_min, z_max, n_axial, growth)
    if not outward:
        zs = zs[::-1]
    prof = np.column_stack([np.full(len(zs), float(radius)), zs])
    return revolve_profile(prof, n_circ, electrode)


def mesh_annular_disc(r_inner, r_outer, z, n_radial, n_circ, *,
                      normal="-z", growth=1.0, electrode=-1) -> list[Panel]:
    """Flat annulus (or full disc when r_inner = 0) at height z."""
    if r_outer <= r_inner or r_inner < 0:
        raise GeometryError("annular disc needs 0 <= r_inner < r_outer")
    rs = graded_points(r_inner, r_outer, n_radial, growth)
    if normal == "+z":
        rs = rs[::-1]
    elif normal != "-z":
        raise GeometryError("normal must be '+z' or '-z'")
    prof = np.column_stack([rs, np.full(len(rs), float(z))])
    return revolve_profile(prof, n_circ, electrode)


def mesh_cone_frustum(r_start, z_start, r_end, z_end, n_meridional, n_circ, *,
                      flip=False, electrode=-1) -> list[Panel]:
    """Lateral surface of a cone frustum between two circles about z.

    The normal points to the (t_z, -t_r) side of the profile direction;
    ``flip`` reverses the traversal and hence the normal.
    """
    rs = np.linspace(r_start, r_end, n_meridional + 1)
    zs = np.linspace(z_start, z_end, n_meridional + 1)
    prof = np.column_stack([rs, zs])
    if flip:
        prof = prof[::-1]
    return revolve_profile(prof, n_circ, electrode)


def mesh_sphere(radius, center=(0.0, 0.0, 0.0), n_polar=16, n_circ=32,
                electrode=-1) -> list[Panel]:
    """Closed sphere with outward normals; poles are triangle fans."""
    if radius <= 0:
        raise GeometryError("sphere needs radius > 0")
    alpha = np.linspace(-0.5 * math.pi, 0.5 * math.pi, n_polar + 1)
    prof = np.column_stack([radius * np.cos(alpha), radius * np.sin(alpha)])
    return translate_panels(revolve_profile(prof, n_circ, electrode), center)


def mesh_rectangle(origin, u_vec, v_vec, nu, nv, electrode=-1) -> list[Panel]:
    """Planar rectangle spanned by u_vec and v_vec; normal along u x v."""
    origin = np.asarray(origin, dtype=float)
    u = np.asarray(u_vec, dtype=float)
    v = np.asarray(v_vec, dtype=float)
    panels = []
    for i in range(nu):
        for j in range(nv):
            p00 = origin + u * (i / nu) + v * (j / nv)
            verts = [p00, p00 + u / nu, p00 + u / nu + v / nv, p00 + v / nv]
            panels.append(make_panel(verts, electrode))
    return panels


_PRIMITIVES = {
    "cylinder": mesh_cylinder,
    "annular_disc": mesh_annular_disc,
    "cone_frustum": mesh_cone_frustum,
    "sphere": mesh_sphere,
    "rectangle": mesh_rectangle,
}


def mesh_surface(primitive: str, **params) -> list[Panel]:
    """Dispatch to a primitive mesher by name.

    Known primitives: cylinder, annular_disc, cone_frustum, sphere,
    rectangle.
    """
    try:
        fn = _PRIMITIVES[primitive]
    except KeyError:
        raise GeometryError(
            f"unknown primitive {primitive!r}; expected one of {sorted(_PRIMITIVES)}"
        ) from None
    return fn(**params)


def translate_panels(panels, offset) -> list[Panel]:
    off = np.asarray(offset, dtype=float)
    return [Panel(p.vertices + off, p.centroid + off, p.area, p.normal.copy(),
                  p.electrode) for p in panels]


def rotate_panels_z(panels, angle) -> list[Panel]:
    c, s = math.cos(angle), math.sin(angle)
    rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    return [Panel(p.vertices @ rot.T, p.centroid @ rot.T, p.area,
                  p.normal @ rot.T, p.electrode) for p in panels]


def mirror_panels_z(panels) -> list[Panel]:
    """Reflect panels through the z = 0 plane, keeping normals outward."""
    out = []
    for p in panels:
        verts = p.vertices[::-1].copy()
        verts[:, 2] *= -1.0
        out.append(make_panel(verts, p.electrode, area=p.area))
    return out


# ---------------------------------------------------------------------------
# solids (used for grid rasterisation and inside-conductor diagnostics)


def _points_in_polygon(r, z, poly) -> np.ndarray:
    """Even-odd containment test of (r, z) points in a closed 2-D polygon."""
    r = np.asarray(r, dtype=float)
    z = np.asarray(z, dtype=float)
    inside = np.zeros(r.shape, dtype=bool)
    n = len(poly)
    j = n - 1
    for i in range(n):
        ri, zi = poly[i]
        rj, zj = poly[j]
        crosses = (zi > z) != (zj > z)
        with np.errstate(divide="ignore", invalid="ignore"):
            r_cross = (rj - ri) * (z - zi) / (zj - zi) + ri
        inside ^= crosses & (r < r_cross)
        j = i
    return inside


@dataclass(frozen=True)
class RevolvedSolid:
    """Solid of revolution about z described by a closed (r, z) polygon."""

    profile: np.ndarray

    def contains(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        r = np.hypot(pts[:, 0], pts[:, 1])
        return _points_in_polygon(r, pts[:, 2], np.asarray(self.profile))


@dataclass(frozen=True)
class CylinderSolid:
    """z-aligned solid cylinder with its axis at (x0, y0)."""

    x0: float
    y0: float
    radius: float
    z_min: float
    z_max: float

    def contains(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        in_r = (pts[:, 0] - self.x0) ** 2 + (pts[:, 1] - self.y0) ** 2 <= self.radius ** 2
        return in_r & (pts[:, 2] >= self.z_min) & (pts[:, 2] <= self.z_max)


# ---------------------------------------------------------------------------
# geometry container


@dataclass
class Electrode:
    """A named conductor: its surface panels and optional solid volumes."""

    name: str
    panels: list[Panel]
    solids: tuple = ()


class TrapGeometry:
    """Panels of all electrodes packed into flat arrays for the solvers.

    Attributes of shape (N, ...) are aligned: ``centroids``, ``areas``,
    ``normals``, ``diameters``, ``electrode_index``.  ``sub_centroids`` and
    ``sub_areas`` hold a fixed 4-point subdivision of every panel used for
    near-field quadrature.
    """

    def __init__(self, electrodes: list[Electrode], *, z0: float | None = None,
                 r0: float | None = None, name: str = ""):
        names = [e.name for e in electrodes]
        if len(set(names)) != len(names):
            raise GeometryError(f"duplicate electrode names in {names}")
        self.name = name
        self.z0 = z0
        self.r0 = r0
        self.electrodes = [
            Electrode(e.name, [replace(p, electrode=i) for p in e.panels], e.solids)
            for i, e in enumerate(electrodes)
        ]
        panels = [p for e in self.electrodes for p in e.panels]
        if not panels:
            raise GeometryError("geometry has no panels")
        self._pack(panels)

    def _pack(self, panels: list[Panel]) -> None:
        n = len(panels)
        self.centroids = np.array([p.centroid for p in panels])
        self.areas = np.array([p.area for p in panels])
        self.normals = np.array([p.normal for p in panels])
        self.diameters = np.array([p.diameter for p in panels])
        self.electrode_index = np.array([p.electrode for p in panels], dtype=np.int32)
        self._panels = panels

        sub_c = np.empty((n, 4, 3))
        sub_a = np.empty((n, 4))
        for i, p in enumerate(panels):
            c, a = _subdivide(p)
            sub_c[i] = c
            sub_a[i] = a
        self.sub_centroids = sub_c
        self.sub_areas = sub_a

        verts = np.concatenate([p.vertices for p in panels])
        self.bounding_radius = float(np.linalg.norm(verts, axis=1).max())
        self.extent = np.abs(verts).max(axis=0)      # per-axis half extent

    @property
    def panels(self) -> list[Panel]:
        return self._panels

    @property
    def n_panels(self) -> int:
        return len(self._panels)

    @property
    def n_electrodes(self) -> int:
        return len(self.electrodes)

    @property
    def electrode_names(self) -> list[str]:
        return [e.name for e in self.electrodes]

    def voltages(self, mapping: dict, default: float = 0.0) -> np.ndarray:
        """Per-electrode voltage vector from a name -> volts mapping."""
        unknown = set(mapping) - set(self.electrode_names)
        if unknown:
            raise GeometryError(
                f"unknown electrode name(s) {sorted(unknown)}; "
                f"geometry has {self.electrode_names}")
        return np.array([float(mapping.get(nm, default))
                         for nm in self.electrode_names])

    def containing_electrode(self, points) -> np.ndarray:
        """Index of the electrode solid containing each point, or -1."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.full(len(pts), -1, dtype=np.int32)
        for i, e in enumerate(self.electrodes):
            for solid in e.solids:
                hit = solid.contains(pts) & (out == -1)
                out[hit] = i
        return out


def _subdivide(panel: Panel) -> tuple[np.ndarray, np.ndarray]:
    """Fixed 4-way midpoint split; child areas rescaled to sum to the parent."""
    v = panel.vertices
    if len(v) == 3:
        m01, m12, m20 = 0.5 * (v[0] + v[1]), 0.5 * (v[1] + v[2]), 0.5 * (v[2] + v[0])
        kids = [(v[0], m01, m20), (m01, v[1], m12), (m20, m12, v[2]), (m01, m12, m20)]
    else:
        m01, m12 = 0.5 * (v[0] + v[1]), 0.5 * (v[1] + v[2])
        m23, m30 = 0.5 * (v[2] + v[3]), 0.5 * (v[3] + v[0])
        c = v.mean(axis=0)
        kids = [(v[0], m01, c, m30), (m01, v[1], m12, c),
                (c, m12, v[2], m23), (m30, c, m23, v[3])]
    cents = np.array([np.mean(k, axis=0) for k in kids])
    flat = np.array([_fan_area_normal(np.asarray(k))[0] for k in kids])
    return cents, flat * (panel.area / flat.sum())


def export_panels_csv(geometry: TrapGeometry, path) -> None:
    """Write one row per panel: electrode, centroid, normal, area."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["electrode_id", "electrode", "cx_m", "cy_m", "cz_m",
                    "nx", "ny", "nz", "area_m2", "n_vertices"])
        for p in geometry.panels:
            w.writerow([p.electrode, geometry.electrode_names[p.electrode],
                        *(f"{x:.9e}" for x in p.centroid),
                        *(f"{x:.9f}" for x in p.normal),
                        f"{p.area:.9e}", len(p.vertices)])


# ---------------------------------------------------------------------------
# trap builders


@dataclass(frozen=True)
class IdealQuadrupoleParams:
    """Hyperbolic ring plus two hyperbolic endcaps with r0^2 = 2 z0^2.

    Surfaces are truncated at ``radial_truncation * r0`` from the axis.
    ``resolution`` sets both the profile segment count and the
    circumferential panel count of every electrode.
    """

    r0: float = 1.0e-3
    radial_truncation: float = 3.0
    resolution: int = 32

    @property
    def z0(self) -> float:
        return self.r0 / math.sqrt(2.0)


def build_ideal_quadrupole(params: IdealQuadrupoleParams | None = None) -> TrapGeometry:
    """Hyperbolic Paul trap: electrodes named ring, endcap_pos, endcap_neg."""
    p = params or IdealQuadrupoleParams()
    if p.radial_truncation <= 1.0:
        raise GeometryError("radial_truncation must exceed 1 (in units of r0)")
    if p.resolution < 4:
        raise GeometryError("resolution must be at least 4")
    r0, z0, res = p.r0, p.z0, p.resolution
    r_max = p.radial_truncation * r0
    z_ring = r0 * math.sqrt((p.radial_truncation ** 2 - 1.0) / 2.0)

    # ring surface r(z) = sqrt(r0^2 + 2 z^2), traversed top to bottom so the
    # normal faces the axis
    zs = np.linspace(z_ring, -z_ring, res + 1)
    ring_prof = np.column_stack([np.sqrt(r0 ** 2 + 2.0 * zs ** 2), zs])
    ring = revolve_profile(ring_prof, res)
    ring_poly = np.vstack([ring_prof, [[r_max, -z_ring], [r_max, z_ring]]])

    # endcap surface z(r) = sqrt(z0^2 + r^2/2); +z cap normal faces -z
    rs = np.linspace(0.0, r_max, res + 1)
    z_cap = np.sqrt(z0 ** 2 + 0.5 * rs ** 2)
    cap_prof = np.column_stack([rs, z_cap])
    cap_pos = revolve_profile(cap_prof, res)
    cap_neg = mirror_panels_z(cap_pos)
    cap_poly = np.vstack([cap_prof, [[0.0, z_cap[-1]]]])
    cap_poly_neg = cap_poly * np.array([1.0, -1.0])

    electrodes = [
        Electrode("ring", ring, (RevolvedSolid(ring_poly),)),
        Electrode("endcap_pos", cap_pos, (RevolvedSolid(cap_poly),)),
        Electrode("endcap_neg", cap_neg, (RevolvedSolid(cap_poly_neg),)),
    ]
    return TrapGeometry(electrodes, z0=z0, r0=r0, name="ideal_quadrupole")


@dataclass(frozen=True)
class EndcapTrapParams:
    """Miniature endcap trap: coaxial RF stems inside grounded shield caps.

    The inner cylindrical electrodes face each other across a gap of
    ``inner_separation`` (so z0 is half of it).  Each shield cap is a
    tube whose trap-facing end is flat from the bore out to
    ``outer_taper_start_diameter`` and then recedes at
    ``outer_cone_angle`` degrees up to the outer diameter, opening
    diagonal laser access.  Setting the taper start to the bore diameter
    gives a fully conical face; the default keeps a flat annulus first,
    which reproduces the measured axial confinement of the real trap
    (see the builder notes).  ``efficiency`` is the measured quadrupole
    transfer used by analytic predictions, not by the field solver.
    ``resolution`` scales every panel count.
    """

    inner_diameter: float = 0.5e-3
    inner_length: float = 16.0e-3
    inner_separation: float = 0.56e-3
    outer_inner_diameter: float = 1.0e-3
    outer_outer_diameter: float = 2.0e-3
    outer_separation: float = 1.0e-3
    outer_cone_angle: float = 45.0
    outer_taper_start_diameter: float = 1.5e-3
    outer_thickness: float = 0.5e-3
    efficiency: float = 0.63
    resolution: int = 3

    @property
    def z0(self) -> float:
        return 0.5 * self.inner_separation


def build_npl_endcap(params: EndcapTrapParams | None = None) -> TrapGeometry:
    """Endcap trap with electrodes inner_pos/inner_neg/outer_pos/outer_neg."""
    p = params or EndcapTrapParams()
    if p.outer_inner_diameter <= p.inner_diameter:
        raise GeometryError("shield bore must be wider than the inner electrode")
    if p.outer_outer_diameter <= p.outer_inner_diameter:
        raise GeometryError("shield outer diameter must exceed its bore")
    if min(p.inner_separation, p.outer_separation, p.inner_length,
           p.outer_thickness) <= 0:
        raise GeometryError("all endcap dimensions must be positive")
    if p.outer_separation <= p.inner_separation:
        raise GeometryError("shields must sit behind the inner electrodes")
    if not 0.0 <= p.outer_cone_angle <= 85.0:
        raise GeometryError("cone angle must lie between 0 and 85 degrees")
    if not (p.outer_inner_diameter <= p.outer_taper_start_diameter
            <= p.outer_outer_diameter):
        raise GeometryError("taper must start between the bore and the outer edge")
    if p.resolution < 1:
        raise GeometryError("resolution must be at least 1")

    k = p.resolution
    n_circ = 12 * k
    r_in = 0.5 * p.inner_diameter
    z0 = p.z0
    z_back = z0 + p.inner_length

    inner = []
    inner += mesh_annular_disc(0.0, r_in, z0, 4 * k, n_circ,
                               normal="-z", growth=0.75)
    inner += mesh_cylinder(r_in, z0, z_back, 8 * k, n_circ, growth=1.4)
    inner += mesh_annular_disc(0.0, r_in, z_back, max(2, k), n_circ, normal="+z")
    inner_solid = CylinderSolid(0.0, 0.0, r_in, z0, z_back)

    # shield profile, counter-clockwise in (r, z): flat face, taper, rim,
    # back annulus, bore
    rb = 0.5 * p.outer_inner_diameter
    ro = 0.5 * p.outer_outer_diameter
    rt = 0.5 * p.outer_taper_start_diameter
    za = 0.5 * p.outer_separation
    zc = za + (ro - rt) * math.tan(math.radians(p.outer_cone_angle))
    zt = zc + p.outer_thickness
    pieces = []
    if rt - rb > 1e-12:
        nf = max(2, 2 * k)
        pieces.append(np.column_stack([np.linspace(rb, rt, nf + 1),
                                       np.full(nf + 1, za)]))
    if ro - rt > 1e-12:
        nc = max(2, 2 * k)
        pieces.append(np.column_stack([np.linspace(rt, ro, nc + 1),
                                       np.linspace(za, zc, nc + 1)]))
    rim = np.column_stack([np.full(2 * k + 1, ro), np.linspace(zc, zt, 2 * k + 1)])
    back = np.column_stack([np.linspace(ro, rb, 2 * k + 1), np.full(2 * k + 1, zt)])
    bore = np.column_stack([np.full(3 * k + 1, rb),
                            graded_points(zt, za, 3 * k, growth=0.7)])
    outer_prof = np.vstack([pieces[0]] + [q[1:] for q in pieces[1:]]
                           + [rim[1:], back[1:], bore[1:]])
    outer = revolve_profile(outer_prof, n_circ)
    outer_solid = RevolvedSolid(outer_prof[:-1])

    electrodes = [
        Electrode("inner_pos", inner, (inner_solid,)),
        Electrode("inner_neg", mirror_panels_z(inner),
                  (CylinderSolid(0.0, 0.0, r_in, -z_back, -z0),)),
        Electrode("outer_pos", outer, (outer_solid,)),
        Electrode("outer_neg", mirror_panels_z(outer),
                  (RevolvedSolid(outer_prof[:-1] * np.array([1.0, -1.0])),)),
    ]
    return TrapGeometry(electrodes, z0=z0, r0=r_in, name="endcap")


@dataclass(frozen=True)
class LinearTrapParams:
    """Four-rod linear trap with two apertured endcap rings.

    ``diagonal_distance`` is the free-space distance between the surfaces
    of diagonally opposite rods, i.e. 2 r0.  The RF pair lies on the x
    axis, the grounded pair on the y axis, and the rings are centred on z
    = +-ring_separation/2.
    """

    rod_diameter: float = 0.6e-3
    diagonal_distance: float = 2.4e-3
    rod_length: float = 20.0e-3
    ring_inner_diameter: float = 6.0e-3
    ring_outer_diameter: float = 12.0e-3
    ring_thickness: float = 2.0e-3
    ring_separation: float = 10.0e-3
    resolution: int = 3

    @property
    def r0(self) -> float:
        return 0.5 * self.diagonal_distance

    @property
    def z0(self) -> float:
        return 0.5 * self.ring_separation


def _rod(x0: float, y0: float, radius: float, half_len: float, k: int,
         n_circ: int, band: tuple[float, float]) -> tuple[list[Panel], CylinderSolid]:
    # Three axial zones: graded toward the trap centre, uniform across the
    # ring band where the screening charge concentrates, coarse ends.
    zf, zb = band
    z_mid = min(zb + 0.1 * (half_len - zb), half_len)
    a_seg = graded_points(0.0, 0.6 * zf, 4 * k, growth=1.3)
    b_seg = np.linspace(0.6 * zf, z_mid, 6 * k + 1)
    c_seg = np.linspace(z_mid, half_len, max(2, k) + 1)
    zs_half = np.concatenate([a_seg, b_seg[1:], c_seg[1:]])
    zs = np.concatenate([-zs_half[::-1], zs_half[1:]])
    prof = np.column_stack([np.full(len(zs), radius), zs])
    panels = revolve_profile(prof, n_circ)
    panels += mesh_annular_disc(0.0, radius, -half_len, max(2, k), n_circ, normal="-z")
    panels += mesh_annular_disc(0.0, radius, half_len, max(2, k), n_circ, normal="+z")
    return (translate_panels(panels, (x0, y0, 0.0)),
            CylinderSolid(x0, y0, radius, -half_len, half_len))


def build_innsbruck_linear(params: LinearTrapParams | None = None) -> TrapGeometry:
    """Linear trap with electrodes rf_rods/ground_rods/ring_pos/ring_neg."""
    p = params or LinearTrapParams()
    a = 0.5 * p.rod_diameter
    r0 = p.r0
    r_ring_in = 0.5 * p.ring_inner_diameter
    r_ring_out = 0.5 * p.ring_outer_diameter
    if a <= 0 or r0 <= 0:
        raise GeometryError("rod diameter and diagonal distance must be positive")
    if math.sqrt(2.0) * (r0 + a) <= 2.0 * a:
        # adjacent rod axes are sqrt(2)*(r0+a) apart and must clear 2a
        raise GeometryError("rods overlap each other")
    if r0 + 2.0 * a >= r_ring_in:
        raise GeometryError("rods touch the ring aperture; widen the rings")
    if r_ring_out <= r_ring_in:
        raise GeometryError("ring outer diameter must exceed its aperture")
    if p.ring_separation + p.ring_thickness >= p.rod_length:
        raise GeometryError("rings must sit inside the rod span")
    if p.resolution < 1:
        raise GeometryError("resolution must be at least 1")

    k = p.resolution
    d = r0 + a                      # rod axis offset from the trap axis
    half_len = 0.5 * p.rod_length
    zf = 0.5 * p.ring_separation
    zb = zf + p.ring_thickness
    rf_panels, gnd_panels = [], []
    rf_solids, gnd_solids = [], []
    for sign in (+1.0, -1.0):
        pan, sol = _rod(sign * d, 0.0, a, half_len, k, 8 * k, (zf, zb))
        rf_panels += pan
        rf_solids.append(sol)
        pan, sol = _rod(0.0, sign * d, a, half_len, k, 8 * k, (zf, zb))
        gnd_panels += pan
        gnd_solids.append(sol)

    front = np.column_stack([graded_points(r_ring_in, r_ring_out, 3 * k, growth=1.3),
                             np.full(3 * k + 1, zf)])
    rim = np.column_stack([np.full(2 * k + 1, r_ring_out), np.linspace(zf, zb, 2 * k + 1)])
    back = np.column_stack([np.linspace(r_ring_out, r_ring_in, 2 * k + 1),
                            np.full(2 * k + 1, zb)])
    bore = np.column_stack([np.full(2 * k + 1, r_ring_in), np.linspace(zb, zf, 2 * k + 1)])
    # counter-clockwise loop so normals point out of the metal
    ring_prof = np.vstack([front, rim[1:], back[1:], bore[1:]])
    ring_pos = revolve_profile(ring_prof, 12 * k)
    ring_solid = RevolvedSolid(ring_prof[:-1])

    electrodes = [
        Electrode("rf_rods", rf_panels, tuple(rf_solids)),
        Electrode("ground_rods", gnd_panels, tuple(gnd_solids)),
        Electrode("ring_pos", ring_pos, (ring_solid,)),
        Electrode("ring_neg", mirror_panels_z(ring_pos),
                  (RevolvedSolid(ring_prof[:-1] * np.array([1.0, -1.0])),)),
    ]
    return TrapGeometry(electrodes, z0=p.z0, r0=r0, name="linear")
