"""Single-ion trajectory integration through any drive-field provider.

Fixed-step classic RK4; the step is tied to the RF period so phase
errors stay uniform across scenarios.  A cached field grid runs in a
compiled kernel, everything else goes through the generic Python path.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from numba import njit

from .bem import BemDriveField, ChargeBasis, DriveWaveform
from .errors import NonFiniteStateError, TrapSimError
from .fieldcache import FieldCache, _eval_point
from .mathieu import IonSpecies

log = logging.getLogger(__name__)

DEFAULT_STEPS_PER_PERIOD = 100
DEFAULT_SAMPLES_PER_PERIOD = 10

STATUS_OK = "ok"
STATUS_LOST = "lost"

_OK, _LOST, _NONFINITE = 0, 1, 2


@dataclass(frozen=True)
class IonState:
    position: np.ndarray
    velocity: np.ndarray
    time: float
    species: IonSpecies

    def __post_init__(self):
        object.__setattr__(self, "position",
                           np.asarray(self.position, dtype=float).reshape(3))
        object.__setattr__(self, "velocity",
                           np.asarray(self.velocity, dtype=float).reshape(3))
        if not (np.all(np.isfinite(self.position))
                and np.all(np.isfinite(self.velocity))):
            raise TrapSimError("ion state must be finite")


@dataclass
class Trajectory:
    """Uniformly sampled ion motion.

    ``status`` is "ok" or "lost"; a lost trajectory is truncated and
    carries the loss time.
    """

    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    dt_out: float
    species: IonSpecies
    status: str = STATUS_OK
    loss_time: float | None = None
    metadata: dict = dc_field(default_factory=dict)

    def __len__(self) -> int:
        return self.times.size

    def axis(self, u: str) -> np.ndarray:
        return self.positions[:, "xyz".index(u)]

    def final_state(self) -> IonState:
        return IonState(self.positions[-1], self.velocities[-1],
                        float(self.times[-1]), self.species)


def initial_state_from_energy(kinetic_energy_ev: float, species: IonSpecies,
                              position=(0.0, 0.0, 0.0),
                              time: float = 0.0) -> IonState:
    """State with the kinetic energy split equally over +x, +y, +z."""
    if kinetic_energy_ev < 0:
        raise TrapSimError("kinetic energy must be non-negative")
    from .constants import ELECTRON_VOLT
    speed = math.sqrt(2.0 * kinetic_energy_ev * ELECTRON_VOLT / species.mass)
    v = speed / math.sqrt(3.0)
    return IonState(np.asarray(position, dtype=float),
                    np.array([v, v, v]), time, species)


@njit(cache=True)
def _cache_rk4(values, origin, inv_h, omega, qm, x0, v0, t0, dt, n_steps,
               decim, r_max2, out_t, out_r, out_v):
    buf = np.empty(9)
    x, y, z = x0[0], x0[1], x0[2]
    vx, vy, vz = v0[0], v0[1], v0[2]
    out_t[0] = t0
    out_r[0, 0], out_r[0, 1], out_r[0, 2] = x, y, z
    out_v[0, 0], out_v[0, 1], out_v[0, 2] = vx, vy, vz
    j = 0
    half = 0.5 * dt
    sixth = dt / 6.0
    for i in range(n_steps):
        t = t0 + i * dt

        if _eval_point(values, origin, inv_h, x, y, z, buf) != 0:
            return j, _LOST, t
        c = math.cos(omega * t)
        s = math.sin(omega * t)
        a1x = qm * (buf[0] + buf[3] * c + buf[6] * s)
        a1y = qm * (buf[1] + buf[4] * c + buf[7] * s)
        a1z = qm * (buf[2] + buf[5] * c + buf[8] * s)

        tm = t + half
        c = math.cos(omega * tm)
        s = math.sin(omega * tm)
        x2 = x + half * vx
        y2 = y + half * vy
        z2 = z + half * vz
        if _eval_point(values, origin, inv_h, x2, y2, z2, buf) != 0:
            return j, _LOST, tm
        v2x = vx + half * a1x
        v2y = vy + half * a1y
        v2z = vz + half * a1z
        a2x = qm * (buf[0] + buf[3] * c + buf[6] * s)
        a2y = qm * (buf[1] + buf[4] * c + buf[7] * s)
        a2z = qm * (buf[2] + buf[5] * c + buf[8] * s)

        x3 = x + half * v2x
        y3 = y + half * v2y
        z3 = z + half * v2z
        if _eval_point(values, origin, inv_h, x3, y3, z3, buf) != 0:
            return j, _LOST, tm
        v3x = vx + half * a2x
        v3y = vy + half * a2y
        v3z = vz + half * a2z
        a3x = qm * (buf[0] + buf[3] * c + buf[6] * s)
        a3y = qm * (buf[1] + buf[4] * c + buf[7] * s)
        a3z = qm * (buf[2] + buf[5] * c + buf[8] * s)

        te = t + dt
        c = math.cos(omega * te)
        s = math.sin(omega * te)
        x4 = x + dt * v3x
        y4 = y + dt * v3y
        z4 = z + dt * v3z
        if _eval_point(values, origin, inv_h, x4, y4, z4, buf) != 0:
            return j, _LOST, te
        v4x = vx + dt * a3x
        v4y = vy + dt * a3y
        v4z = vz + dt * a3z
        a4x = qm * (buf[0] + buf[3] * c + buf[6] * s)
        a4y = qm * (buf[1] + buf[4] * c + buf[7] * s)
        a4z = qm * (buf[2] + buf[5] * c + buf[8] * s)

        x += sixth * (vx + 2.0 * (v2x + v3x) + v4x)
        y += sixth * (vy + 2.0 * (v2y + v3y) + v4y)
        z += sixth * (vz + 2.0 * (v2z + v3z) + v4z)
        vx += sixth * (a1x + 2.0 * (a2x + a3x) + a4x)
        vy += sixth * (a1y + 2.0 * (a2y + a3y) + a4y)
        vz += sixth * (a1z + 2.0 * (a2z + a3z) + a4z)

        if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(z)
                and math.isfinite(vx) and math.isfinite(vy)
                and math.isfinite(vz)):
            return j, _NONFINITE, te
        if x * x + y * y + z * z > r_max2:
            return j, _LOST, te
        if (i + 1) % decim == 0:
            j += 1
            out_t[j] = t0 + (i + 1) * dt
            out_r[j, 0], out_r[j, 1], out_r[j, 2] = x, y, z
            out_v[j, 0], out_v[j, 1], out_v[j, 2] = vx, vy, vz
    return j, _OK, t0 + n_steps * dt


def _python_rk4(provider, qm, state0, dt, n_steps, decim, r_max2,
                out_t, out_r, out_v):
    omega = provider.rf_omega

    def accel(r, t):
        a, b, c = provider.drive_parts(r.reshape(1, 3))
        e = a[0] + b[0] * math.cos(omega * t) + c[0] * math.sin(omega * t)
        return qm * e

    r = state0.position.copy()
    v = state0.velocity.copy()
    t0 = state0.time
    out_t[0] = t0
    out_r[0] = r
    out_v[0] = v
    j = 0
    half = 0.5 * dt
    for i in range(n_steps):
        t = t0 + i * dt
        a1 = accel(r, t)
        v2 = v + half * a1
        a2 = accel(r + half * v, t + half)
        v3 = v + half * a2
        a3 = accel(r + half * v2, t + half)
        v4 = v + dt * a3
        a4 = accel(r + dt * v3, t + dt)
        r = r + dt / 6.0 * (v + 2.0 * (v2 + v3) + v4)
        v = v + dt / 6.0 * (a1 + 2.0 * (a2 + a3) + a4)
        te = t + dt
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(v))):
            return j, _NONFINITE, te
        if r @ r > r_max2:
            return j, _LOST, te
        if (i + 1) % decim == 0:
            j += 1
            out_t[j] = t0 + (i + 1) * dt
            out_r[j] = r
            out_v[j] = v
    return j, _OK, t0 + n_steps * dt


def _resolve_provider(field, drive):
    if isinstance(field, ChargeBasis):
        if drive is None:
            raise TrapSimError("a ChargeBasis needs a DriveWaveform")
        return BemDriveField(field, drive)
    if hasattr(field, "drive_parts") and hasattr(field, "rf_omega"):
        if drive is not None and isinstance(field, FieldCache):
            if abs(field.omega - drive.rf_omega) > 1e-9 * max(1.0, field.omega):
                raise TrapSimError(
                    "cache was built for a different RF frequency")
        return field
    raise TrapSimError(
        f"unsupported field provider {type(field).__name__}")


def integrate_trajectory(init: IonState, field, drive: DriveWaveform | None = None,
                         duration: float = 1.0e-3,
                         steps_per_rf_period: int = DEFAULT_STEPS_PER_PERIOD,
                         dt_out: float | None = None,
                         dt: float | None = None,
                         bounding_radius: float | None = None,
                         metadata: dict | None = None) -> Trajectory:
    """Integrate the ion equations of motion m r'' = e E(r, t).

    Parameters
    ----------
    field : ChargeBasis | FieldCache | analytic provider
        A ChargeBasis requires ``drive``; anything exposing
        ``drive_parts``/``rf_omega`` is used directly.
    duration : s
    steps_per_rf_period : int
        Sets the step dt = RF period / steps (>= 50 enforced).  Ignored
        when ``dt`` is given explicitly (required for static fields).
    dt_out : s
        Output sample interval; rounded to a whole number of steps.
    bounding_radius : m
        Ion is flagged lost beyond this radius (and, for cached fields,
        on leaving the cached box).

    Returns
    -------
    Trajectory
        Truncated at the loss time when the ion leaves the valid
        region; raises NonFiniteStateError if the state diverges.
    """
    provider = _resolve_provider(field, drive)
    omega = provider.rf_omega
    if dt is None:
        if omega <= 0:
            raise TrapSimError("static field: pass an explicit dt")
        if steps_per_rf_period < 50:
            raise TrapSimError("steps_per_rf_period must be at least 50")
        dt = (2.0 * math.pi / omega) / steps_per_rf_period
    if duration <= 0:
        raise TrapSimError("duration must be positive")
    n_steps = max(1, int(round(duration / dt)))
    if dt_out is None:
        decim = (max(1, steps_per_rf_period // DEFAULT_SAMPLES_PER_PERIOD)
                 if omega > 0 else 1)
    else:
        decim = max(1, int(round(dt_out / dt)))
    n_out = n_steps // decim + 1
    out_t = np.empty(n_out)
    out_r = np.empty((n_out, 3))
    out_v = np.empty((n_out, 3))
    r_max2 = math.inf if bounding_radius is None else bounding_radius ** 2
    qm = init.species.charge / init.species.mass

    if isinstance(provider, FieldCache):
        j, code, t_end = _cache_rk4(
            provider.values, provider.origin, 1.0 / provider.spacing,
            provider.omega, qm, init.position, init.velocity, init.time,
            dt, n_steps, decim, r_max2, out_t, out_r, out_v)
    else:
        j, code, t_end = _python_rk4(
            provider, qm, init, dt, n_steps, decim, r_max2,
            out_t, out_r, out_v)

    if code == _NONFINITE:
        raise NonFiniteStateError(
            "ion state diverged",
            last_state=IonState(out_r[j], out_v[j], float(out_t[j]),
                                init.species))
    traj = Trajectory(times=out_t[:j + 1].copy(),
                      positions=out_r[:j + 1].copy(),
                      velocities=out_v[:j + 1].copy(),
                      dt_out=decim * dt,
                      species=init.species,
                      status=STATUS_LOST if code == _LOST else STATUS_OK,
                      loss_time=t_end if code == _LOST else None,
                      metadata=metadata or {})
    if code == _LOST:
        log.warning("ion lost at t = %.3e s", t_end)
    return traj


def total_energy(state: IonState, field, voltages=None) -> float:
    """Kinetic plus potential energy in joules for a static field.

    ``field`` is a ChargeBasis (with per-electrode ``voltages``) or any
    provider witha ``potential(points, t)`` method; the diagnostic is
    meaningful only when the configuration is time independent.
    """
    kinetic = 0.5 * state.species.mass * float(state.velocity @ state.velocity)
    if isinstance(field, ChargeBasis):
        from .bem import potential_at
        phi = float(potential_at(field, state.position.reshape(1, 3),
                                 voltages)[0])
    elif hasattr(field, "potential"):
        phi = float(np.asarray(field.potential(
            state.position.reshape(1, 3), state.time)).ravel()[0])
    else:
        raise TrapSimError(
            f"no potential available from {type(field).__name__}")
    return kinetic + state.species.charge * phi


def export_trajectory_csv(trajectory: Trajectory, path) -> None:
    """CSV with header t,x,y,z,vx,vy,vz in SI units."""
    data = np.column_stack([trajectory.times, trajectory.positions,
                            trajectory.velocities])
    header = "t,x,y,z,vx,vy,vz"
    np.savetxt(path, data, delimiter=",", header=header, comments="")
