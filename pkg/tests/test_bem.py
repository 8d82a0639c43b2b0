import math

import numpy as np
import pytest

from trapsim import bem
from trapsim import geometry as ge
from trapsim.constants import EPSILON_0
from trapsim.errors import OverlappingPanelsError


@pytest.fixture(scope="module")
def sphere_basis():
    panels = ge.mesh_sphere(1.0, n_polar=32, n_circ=64)
    g = ge.TrapGeometry([ge.Electrode("sphere", panels)], name="sphere")
    return bem.solve_charge_basis(g)


def test_sphere_capacitance(sphere_basis):
    c = sphere_basis.charges([1.0])[0]
    exact = 4.0 * math.pi * EPSILON_0
    assert abs(c / exact - 1.0) < 0.01


def test_sphere_exterior_potential(sphere_basis):
    # a conducting sphere at 1 V looks like a point charge: phi = R/r
    pts = np.array([[2.0, 0.0, 0.0], [0.0, 3.0, 0.0], [1.0, 1.0, 1.0]])
    phi = bem.potential_at(sphere_basis, pts, [1.0])
    r = np.linalg.norm(pts, axis=1)
    assert np.allclose(phi, 1.0 / r, rtol=5e-3)


def test_sphere_interior_equipotential(sphere_basis):
    pts = np.array([[0.0, 0.0, 0.0], [0.3, 0.1, -0.2]])
    phi = bem.potential_at(sphere_basis, pts, [1.0], check_inside=False)
    assert np.allclose(phi, 1.0, atol=5e-3)


def test_basis_residual_small(sphere_basis):
    assert sphere_basis.residual < 1e-10


def test_quadrupole_center_potential(quad_basis):
    phi = bem.potential_at(quad_basis, [[0.0, 0.0, 0.0]], [1.0, 0.0, 0.0])[0]
    assert abs(phi - 0.5) < 0.01


def test_superposition_is_exact(quad_basis):
    pts = np.array([[1e-4, -2e-4, 5e-5], [0.0, 0.0, 3e-4]])
    pa = bem.potential_at(quad_basis, pts, [1.0, 0.0, 0.0])
    pb = bem.potential_at(quad_basis, pts, [0.0, -2.0, 0.5])
    pc = bem.potential_at(quad_basis, pts, [1.0, -2.0, 0.5])
    assert np.allclose(pa + pb, pc, rtol=0.0, atol=1e-12)


def test_field_matches_potential_gradient(quad_basis):
    v = [1.0, 0.0, 0.0]
    p0 = np.array([2e-4, 1e-4, -1.5e-4])
    e = bem.field_at(quad_basis, [p0], v)[0]
    h = 1e-7
    for k in range(3):
        d = np.zeros(3)
        d[k] = h
        num = -(bem.potential_at(quad_basis, [p0 + d], v)[0]
                - bem.potential_at(quad_basis, [p0 - d], v)[0]) / (2.0 * h)
        assert abs(num - e[k]) < 1e-6 * max(1.0, abs(e[k]))


def test_points_inside_conductor_warn(quad_basis, caplog):
    g = quad_basis.geometry
    inside = [[g.r0 * 1.5, 0.0, 0.0]]  # within the ring electrode body
    with caplog.at_level("WARNING", logger="trapsim.bem"):
        phi = bem.potential_at(quad_basis, inside, [1.0, 0.0, 0.0])
    assert any("inside a conductor" in r.message for r in caplog.records)
    assert np.isfinite(phi).all()
    caplog.clear()
    with caplog.at_level("WARNING", logger="trapsim.bem"):
        bem.potential_at(quad_basis, inside, [1.0, 0.0, 0.0],
                         check_inside=False)
    assert not caplog.records


def test_overlapping_panels_detected():
    r = ge.mesh_rectangle((0.0, 0.0, 0.0), (1e-3, 0.0, 0.0),
                          (0.0, 1e-3, 0.0), 2, 2)
    g = ge.TrapGeometry([ge.Electrode("a", r), ge.Electrode("b", list(r))])
    with pytest.raises(OverlappingPanelsError):
        bem.assemble_influence_matrix(g)


def test_drive_waveform_parts(quad_geometry):
    d = bem.DriveWaveform.for_geometry(quad_geometry,
                                       dc={"endcap_pos": 2.0},
                                       ac={"ring": 100.0},
                                       frequency=10e6,
                                       phase={"ring": 0.3})
    assert d.rf_omega == pytest.approx(2.0 * math.pi * 10e6)
    a, b, c = d.cos_parts()
    for t in (0.0, 1.7e-8, 9.3e-7):
        v = d.voltages(t)
        w = a + b * math.cos(d.rf_omega * t) + c * math.sin(d.rf_omega * t)
        assert np.allclose(v, w, atol=1e-12)
    assert a[1] == 2.0 and b[0] == pytest.approx(100.0 * math.cos(0.3))


def test_drive_waveform_validation(quad_geometry):
    from trapsim.errors import GeometryError
    with pytest.raises(GeometryError):
        bem.DriveWaveform.for_geometry(quad_geometry, dc={"nope": 1.0})
    mixed = bem.DriveWaveform(np.zeros(2), np.ones(2),
                              np.array([1e6, 2e6]), np.zeros(2))
    with pytest.raises(ValueError):
        mixed.rf_omega


def test_bem_drive_field_consistency(quad_basis, quad_geometry):
    d = bem.DriveWaveform.for_geometry(quad_geometry, ac={"ring": 50.0},
                                       frequency=12e6)
    provider = bem.BemDriveField(quad_basis, d)
    pts = np.array([[1e-4, 0.0, 2e-4], [-2e-4, 1e-4, 0.0]])
    a, b, c = provider.drive_parts(pts)
    t = 3.7e-8
    direct = bem.field_at(quad_basis, pts, d.voltages(t))
    combo = (a + b * math.cos(provider.rf_omega * t)
             + c * math.sin(provider.rf_omega * t))
    assert np.allclose(combo, direct, rtol=1e-10, atol=1e-8)
