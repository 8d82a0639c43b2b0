import math

import numpy as np
import pytest

from trapsim import fdm
from trapsim import geometry as ge
from trapsim import bem
from trapsim.errors import (NonConvergenceError, PointOutsideGridError,
                            TrapSimError)


def _shell_fixed(n):
    fixed = np.zeros((n, n, n), dtype=bool)
    fixed[0, :, :] = fixed[-1, :, :] = True
    fixed[:, 0, :] = fixed[:, -1, :] = True
    fixed[:, :, 0] = fixed[:, :, -1] = True
    return fixed


@pytest.fixture(scope="module")
def quad_fdm_grid(quad_geometry):
    return fdm.solve_grid(quad_geometry,
                          quad_geometry.voltages({"ring": 1.0}),
                          spacing=2.0 * 2e-3 / 128, half_extent=2e-3)


def test_parallel_plates_linear_solution():
    n = 33
    values = np.zeros((n, n, n))
    fixed = _shell_fixed(n)
    values[-1, :, :] = 1.0      # +x face at 1 V, rest grounded... but
    # grounding the side walls would bend the field, so fix them to the
    # linear ramp and leave only the interior free
    x = np.linspace(0.0, 1.0, n)
    ramp = np.broadcast_to(x[:, None, None], (n, n, n)).copy()
    values = np.where(fixed, ramp, 0.0)
    sweeps, hist = fdm.sor_relax(values, fixed)
    exact = ramp
    assert np.abs(values - exact).max() < 1e-5
    assert sweeps == len(hist)
    assert hist[-1] <= fdm.DEFAULT_TOLERANCE


def test_all_zero_boundary_gives_zero():
    n = 17
    values = np.zeros((n, n, n))
    fixed = _shell_fixed(n)
    fdm.sor_relax(values, fixed)
    assert np.abs(values).max() == 0.0


def test_unfixed_shell_rejected():
    n = 9
    values = np.zeros((n, n, n))
    fixed = _shell_fixed(n)
    fixed[0, 4, 4] = False
    with pytest.raises(TrapSimError):
        fdm.sor_relax(values, fixed)


def test_non_convergence_raises_with_history():
    n = 33
    values = np.zeros((n, n, n))
    fixed = _shell_fixed(n)
    values[-1, :, :] = 1.0
    with pytest.raises(NonConvergenceError) as exc:
        fdm.sor_relax(values, fixed, max_sweeps=5)
    hist = exc.value.residual_history
    assert 0 < len(hist) <= 100
    assert hist[-1] > fdm.DEFAULT_TOLERANCE


def test_discretization_error_quarters_on_h_halving():
    # harmonic quartic x^4 - 6 x^2 z^2 + z^4 exercises pure O(h^2)
    # truncation with Dirichlet data exact on every boundary node
    def run(n):
        axis = np.linspace(-1.0, 1.0, n)
        gx, gy, gz = np.meshgrid(axis, axis, axis, indexing="ij")
        exact = gx ** 4 - 6.0 * gx ** 2 * gz ** 2 + gz ** 4
        fixed = _shell_fixed(n)
        values = np.where(fixed, exact, 0.0)
        fdm.sor_relax(values, fixed, tolerance=1e-10)
        return np.abs(values - exact).max()

    ratio = run(17) / run(33)
    assert 3.0 < ratio < 5.33


def test_solved_grid_obeys_maximum_principle(quad_fdm_grid):
    grid = quad_fdm_grid
    lo = grid.values[grid.fixed].min() - 1e-9
    hi = grid.values[grid.fixed].max() + 1e-9
    assert grid.values.min() >= lo
    assert grid.values.max() <= hi


def test_quadrupole_center_potential(quad_fdm_grid):
    phi = fdm.interpolate_potential(quad_fdm_grid, [[0.0, 0.0, 0.0]])[0]
    assert abs(phi - 0.5) < 0.02


def test_rasterization_marks_electrode_nodes(quad_geometry):
    h = 1e-4
    origin, dims = fdm._grid_axes((0.0, 0.0, 0.0), 2e-3, h)
    values, fixed = fdm.rasterize_electrodes(
        quad_geometry, quad_geometry.voltages({"ring": 1.0}), origin, h, dims)
    # shell fully fixed; vacuum boundary nodes grounded, but a conductor
    # piercing the box wall keeps its own potential there
    assert fixed[0].all()
    assert values[0, 0, 0] == 0.0
    assert values[0, 20, 20] == 1.0   # ring body crosses the -x face
    # a node in the ring body carries the ring voltage
    node = np.round((np.array([1.5e-3, 0.0, 0.0]) - origin) / h).astype(int)
    assert fixed[tuple(node)]
    assert values[tuple(node)] == 1.0
    # the trap center stays free
    center = np.round((np.zeros(3) - origin) / h).astype(int)
    assert not fixed[tuple(center)]


def test_interpolate_field_exact_for_linear_potential():
    n = 17
    h = 0.1
    origin = np.array([-0.8, -0.8, -0.8])
    axis = origin[0] + h * np.arange(n)
    gx, gy, gz = np.meshgrid(axis, axis, axis, indexing="ij")
    grid = fdm.PotentialGrid(origin=origin, spacing=h,
                             values=2.0 * gx - 3.0 * gy + 0.5 * gz,
                             fixed=np.ones((n, n, n), dtype=bool))
    pts = np.array([[0.0, 0.0, 0.0], [0.33, -0.21, 0.4]])
    e = fdm.interpolate_field(grid, pts)
    assert np.allclose(e, [[-2.0, 3.0, -0.5]] * 2, atol=1e-12)
    phi = fdm.interpolate_potential(grid, pts)
    exact = 2.0 * pts[:, 0] - 3.0 * pts[:, 1] + 0.5 * pts[:, 2]
    assert np.allclose(phi, exact, atol=1e-12)


def test_point_outside_grid_raises():
    n = 9
    grid = fdm.PotentialGrid(origin=np.zeros(3), spacing=1.0,
                             values=np.zeros((n, n, n)),
                             fixed=np.ones((n, n, n), dtype=bool))
    with pytest.raises(PointOutsideGridError):
        fdm.interpolate_field(grid, [[20.0, 1.0, 1.0]])
    with pytest.raises(PointOutsideGridError):
        fdm.interpolate_potential(grid, [[-5.0, 1.0, 1.0]])


def test_on_axis_field_tracks_reference(quad_geometry):
    # finer grid than the potential example: field errors carry an extra
    # factor 1/h from differencing, so 257 nodes are needed for 2%
    from trapsim import mathieu as mt
    grid = fdm.solve_grid(quad_geometry,
                          quad_geometry.voltages({"ring": 1.0}),
                          spacing=2.0 * 2e-3 / 256, half_extent=2e-3)
    z0 = quad_geometry.z0
    zs = np.linspace(-0.5 * z0, 0.5 * z0, 21)
    pts = np.column_stack([np.zeros_like(zs), np.zeros_like(zs), zs])
    e_fdm = fdm.interpolate_field(grid, pts)[:, 2]
    ref = mt.IdealQuadrupoleField(quad_geometry.r0, z0, 1.0, 0.0, 0.0)
    e_ref = ref.fields(pts, 0.0)[:, 2]
    scale = np.abs(e_ref).max()       # field at the band edge 0.5 z0
    assert float(np.abs(e_fdm - e_ref).max() / scale) < 0.02


def test_fdm_drive_field(quad_geometry):
    drive = bem.DriveWaveform.for_geometry(
        quad_geometry, dc={"endcap_pos": 0.5, "endcap_neg": 0.5},
        ac={"ring": 1.0}, frequency=10e6)
    provider = fdm.FdmDriveField.solve(quad_geometry, drive,
                                       spacing=2e-3 / 32, half_extent=2e-3)
    assert provider.rf_omega == pytest.approx(2.0 * math.pi * 10e6)
    pts = np.array([[1e-4, 0.0, 0.0], [0.0, 0.0, 2e-4]])
    a, b, c = provider.drive_parts(pts)
    assert np.allclose(c, 0.0)          # no phase offset: sin part empty
    assert not np.allclose(b, 0.0)
    t = 2.1e-8
    combo = a + b * math.cos(provider.rf_omega * t)
    assert np.allclose(provider.fields(pts, t), combo, rtol=1e-12)


def test_fdm_drive_field_static_only(quad_geometry):
    drive = bem.DriveWaveform.for_geometry(quad_geometry,
                                           dc={"ring": 2.0})
    provider = fdm.FdmDriveField.solve(quad_geometry, drive,
                                       spacing=2e-3 / 16, half_extent=2e-3)
    assert provider.rf_omega == 0.0
    a, b, c = provider.drive_parts([[0.0, 0.0, 1e-4]])
    assert not np.allclose(a, 0.0)
    assert np.allclose(b, 0.0) and np.allclose(c, 0.0)
