import math

import numpy as np
import pytest

from trapsim import dynamics as dy
from trapsim import fieldcache as fc
from trapsim import mathieu as mt
from trapsim.errors import NonFiniteStateError, TrapSimError


class _ZeroField:
    rf_omega = 0.0

    def drive_parts(self, points):
        p = np.atleast_2d(np.asarray(points, dtype=float))
        z = np.zeros_like(p)
        return z, z.copy(), z.copy()


def _sho(frequency=1e6, species=mt.SR88):
    k = species.mass * (2.0 * math.pi * frequency) ** 2
    return dy, mt.StaticHarmonicField(k, species.charge)


def test_ion_state_validation():
    with pytest.raises(TrapSimError):
        dy.IonState([0.0, 0.0, math.nan], [0.0, 0.0, 0.0], 0.0, mt.SR88)


def test_initial_state_from_energy():
    st = dy.initial_state_from_energy(0.05, mt.SR88)
    ke = 0.5 * mt.SR88.mass * float(st.velocity @ st.velocity)
    assert ke == pytest.approx(0.05 * 1.602176634e-19, rel=1e-12)
    assert st.velocity[0] == st.velocity[1] == st.velocity[2]
    with pytest.raises(TrapSimError):
        dy.initial_state_from_energy(-1.0, mt.SR88)


def test_sho_matches_closed_form():
    _, well = _sho(1e6)
    om = 2.0 * math.pi * 1e6
    x0 = 1e-5
    init = dy.IonState([x0, 0.0, 0.0], [0.0, 0.0, 0.0], 0.0, mt.SR88)
    period = 1.0 / 1e6
    traj = dy.integrate_trajectory(init, well, duration=10 * period,
                                   dt=period / 200.0)
    exact = x0 * np.cos(om * traj.times)
    assert np.max(np.abs(traj.axis("x") - exact)) < 1e-4 * x0
    assert traj.status == dy.STATUS_OK


def test_rk4_is_fourth_order():
    _, well = _sho(1e6)
    om = 2.0 * math.pi * 1e6
    x0 = 1e-5
    period = 1e-6
    errs = []
    for n in (100, 200):
        init = dy.IonState([x0, 0.0, 0.0], [0.0, 0.0, 0.0], 0.0, mt.SR88)
        traj = dy.integrate_trajectory(init, well, duration=5 * period,
                                       dt=period / n, dt_out=period / n)
        exact = x0 * np.cos(om * traj.times)
        errs.append(np.max(np.abs(traj.axis("x") - exact)))
    ratio = errs[0] / errs[1]
    assert 12.0 < ratio < 20.0


def test_energy_conservation_sho():
    _, well = _sho(2e6)
    init = dy.IonState([2e-5, 0.0, -1e-5], [50.0, -20.0, 10.0], 0.0, mt.SR88)
    e0 = dy.total_energy(init, well)
    traj = dy.integrate_trajectory(init, well, duration=1e-5, dt=5e-10)
    e1 = dy.total_energy(traj.final_state(), well)
    assert abs(e1 / e0 - 1.0) < 1e-6


def test_zero_field_is_uniform_motion():
    init = dy.IonState([1e-6, 0.0, 0.0], [10.0, -5.0, 2.0], 0.0, mt.SR88)
    traj = dy.integrate_trajectory(init, _ZeroField(), duration=1e-5, dt=1e-8)
    expect = init.position + np.outer(traj.times, init.velocity)
    assert np.allclose(traj.positions, expect, atol=1e-12)


def test_integration_is_deterministic(ideal_q04):
    init = dy.initial_state_from_energy(0.05, mt.SR88)
    a = dy.integrate_trajectory(init, ideal_q04, duration=2e-5)
    b = dy.integrate_trajectory(init, ideal_q04, duration=2e-5)
    assert np.array_equal(a.positions, b.positions)
    assert np.array_equal(a.velocities, b.velocities)


def test_output_sampling(ideal_q04):
    init = dy.initial_state_from_energy(0.01, mt.SR88)
    traj = dy.integrate_trajectory(init, ideal_q04, duration=1e-5,
                                   dt_out=1e-7)
    assert traj.times[0] == 0.0
    assert np.allclose(np.diff(traj.times), traj.dt_out, rtol=1e-12)
    assert np.allclose(traj.positions[0], init.position)


def test_ion_loss_detected(ideal_q04):
    init = dy.initial_state_from_energy(0.05, mt.SR88)
    traj = dy.integrate_trajectory(init, ideal_q04, duration=1e-4,
                                   bounding_radius=2e-5)
    assert traj.status == dy.STATUS_LOST
    assert traj.loss_time is not None
    assert traj.times[-1] < 1e-4


def test_nonfinite_state_raises(quad_geometry):
    # q_z = 1.6 is deep in the unstable region; the motion diverges
    om = 2.0 * math.pi * 10e6
    v = (1.6 * mt.SR88.mass * om ** 2
         * (quad_geometry.r0 ** 2 + 2 * quad_geometry.z0 ** 2)
         / (8.0 * mt.SR88.charge))
    bad = mt.IdealQuadrupoleField(quad_geometry.r0, quad_geometry.z0,
                                  0.0, v, om)
    init = dy.IonState([0.0, 0.0, 1e-6], [0.0, 0.0, 0.0], 0.0, mt.SR88)
    with pytest.raises(NonFiniteStateError) as exc:
        dy.integrate_trajectory(init, bad, duration=2e-4)
    assert exc.value.last_state is not None


def test_cache_and_direct_paths_agree(ideal_q04):
    cache = fc.build_field_cache(ideal_q04, (0.0, 0.0, 0.0), 2e-4)
    init = dy.initial_state_from_energy(0.02, mt.SR88)
    kw = dict(duration=1e-5, dt_out=1e-8)
    direct = dy.integrate_trajectory(init, ideal_q04, **kw)
    cached = dy.integrate_trajectory(init, cache, **kw)
    assert len(direct) == len(cached)
    assert np.max(np.abs(direct.positions - cached.positions)) < 1e-10


def test_static_field_needs_explicit_dt():
    _, well = _sho()
    init = dy.IonState([1e-6, 0.0, 0.0], [0.0, 0.0, 0.0], 0.0, mt.SR88)
    with pytest.raises(TrapSimError):
        dy.integrate_trajectory(init, well, duration=1e-5)


def test_step_resolution_enforced(ideal_q04):
    init = dy.initial_state_from_energy(0.01, mt.SR88)
    with pytest.raises(TrapSimError):
        dy.integrate_trajectory(init, ideal_q04, duration=1e-5,
                                steps_per_rf_period=10)


def test_export_trajectory_csv(tmp_path, ideal_q04):
    init = dy.initial_state_from_energy(0.01, mt.SR88)
    traj = dy.integrate_trajectory(init, ideal_q04, duration=2e-6)
    path = tmp_path / "traj.csv"
    dy.export_trajectory_csv(traj, path)
    lines = path.read_text().strip().splitlines()
    assert len(lines) == len(traj) + 1
    assert lines[0] == "t,x,y,z,vx,vy,vz"
    row = [float(u) for u in lines[1].split(",")]
    assert row[0] == traj.times[0]
