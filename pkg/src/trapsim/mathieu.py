"""Analytic trap theory: potentials, stability parameters, beta ladder.

Conventions: a_u and q_u follow the standard Mathieu form
u'' + (a - 2q cos 2 xi) u = 0 with xi = Omega t / 2.  The fundamental
secular frequency is beta Omega / 2.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .constants import ATOMIC_MASS, ELEMENTARY_CHARGE, MASS_CA40_U, MASS_SR88_U
from .errors import TrapSimError, UnstableParametersError

log = logging.getLogger(__name__)

DEHMELT_Q_LIMIT = 0.2     # approximation degrades above this |q|
Q_CRITICAL = 0.908        # edge of the lowest stability region at a = 0


@dataclass(frozen=True)
class IonSpecies:
    """Mass in kg, signed charge in C."""

    mass: float
    charge: float
    label: str = ""

    def __post_init__(self):
        if self.mass <= 0:
            raise TrapSimError("ion mass must be positive")
        if self.charge == 0:
            raise TrapSimError("ion charge must be nonzero")

    @classmethod
    def from_isotope(cls, mass_u: float, charge_state: int = 1,
                     label: str = "") -> "IonSpecies":
        return cls(mass=mass_u * ATOMIC_MASS,
                   charge=charge_state * ELEMENTARY_CHARGE,
                   label=label)


SR88 = IonSpecies.from_isotope(MASS_SR88_U, 1, "Sr-88")
CA40 = IonSpecies.from_isotope(MASS_CA40_U, 1, "Ca-40")

_ISOTOPES = {"sr-88": SR88, "sr88": SR88, "ca-40": CA40, "ca40": CA40}


def species_by_name(name: str) -> IonSpecies:
    try:
        return _ISOTOPES[name.strip().lower()]
    except KeyError:
        raise TrapSimError(
            f"unknown ion species {name!r}; known: Sr-88, Ca-40") from None


@dataclass(frozen=True)
class StabilityParams:
    a_x: float
    a_y: float
    a_z: float
    q_x: float
    q_y: float
    q_z: float

    def axis(self, u: str) -> tuple[float, float]:
        return getattr(self, f"a_{u}"), getattr(self, f"q_{u}")


@dataclass(frozen=True)
class SecularFrequencies:
    """Angular fundamentals per axis with the betas that produced them."""

    omega_x: float
    omega_y: float
    omega_z: float
    beta_x: float
    beta_y: float
    beta_z: float
    method: str = "floquet"


# ---------------------------------------------------------------------------
# analytic potentials


def analytic_quadrupole_potential(r, z, r0: float, z0: float, U: float,
                                  V: float, omega: float, t: float):
    """Rotationally symmetric quadrupole potential in volts."""
    denom = r0 * r0 + 2.0 * z0 * z0
    if denom == 0.0:
        raise TrapSimError("degenerate quadrupole: r0^2 + 2 z0^2 = 0")
    r = np.asarray(r, dtype=float)
    z = np.asarray(z, dtype=float)
    g = (r * r - 2.0 * z * z + 2.0 * z0 * z0) / denom
    return g * (U + V * math.cos(omega * t))


def analytic_linear_potential(x, y, r0: float, U: float, V: float,
                              omega: float, t: float):
    """Two-dimensional quadrupole potential of a linear trap in volts."""
    if r0 <= 0:
        raise TrapSimError("r0 must be positive")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return (x * x - y * y) / (r0 * r0) * (U + V * math.cos(omega * t))


# ---------------------------------------------------------------------------
# stability parameters


def endcap_stability_params(species: IonSpecies, U: float, V: float,
                            omega: float, z0: float,
                            efficiency: float) -> StabilityParams:
    """a_u, q_u for the axially driven endcap geometry.

    The axial parameters are twice the radial ones with opposite sign;
    ``efficiency`` scales the ideal-quadrupole coupling.
    """
    if omega <= 0 or z0 <= 0:
        raise TrapSimError("omega and z0 must be positive")
    if not 0.0 < efficiency <= 1.0:
        raise TrapSimError("efficiency must lie in (0, 1]")
    scale = species.charge / (species.mass * z0 * z0 * omega * omega)
    a_r = 2.0 * efficiency * U * scale
    q_r = -efficiency * V * scale
    return StabilityParams(a_x=a_r, a_y=a_r, a_z=-2.0 * a_r,
                           q_x=q_r, q_y=q_r, q_z=-2.0 * q_r)


def linear_stability_params(species: IonSpecies, U0: float, V: float,
                            omega: float, r0: float, z0: float,
                            kappa: float) -> StabilityParams:
    """a_u, q_u for a four-rod linear trap with DC endcap rings."""
    if omega <= 0 or r0 <= 0 or z0 <= 0:
        raise TrapSimError("omega, r0 and z0 must be positive")
    e_m = species.charge / (species.mass * omega * omega)
    a_r = -4.0 * kappa * U0 * e_m / (z0 * z0)
    q_x = 4.0 * V * e_m / (r0 * r0)
    return StabilityParams(a_x=a_r, a_y=a_r, a_z=-2.0 * a_r,
                           q_x=q_x, q_y=-q_x, q_z=0.0)


# ---------------------------------------------------------------------------
# beta approximations and the Floquet reference


def beta_dehmelt(a: float, q: float) -> float:
    radicand = a + 0.5 * q * q
    if radicand < 0.0:
        raise UnstableParametersError(
            f"a + q^2/2 = {radicand:.3e} < 0: no real Dehmelt beta")
    if abs(q) >= DEHMELT_Q_LIMIT:
        log.warning("Dehmelt approximation used at |q| = %.3f >= %.1f",
                    abs(q), DEHMELT_Q_LIMIT)
    return math.sqrt(radicand)


def beta_fourth_order(a: float, q: float) -> float:
    d1 = 2.0 * (a - 1.0) ** 2 - q * q
    d2 = 32.0 * (a - 1.0) ** 3 * (a - 4.0)
    if abs(d1) < 1e-12 or abs(d2) < 1e-12:
        raise UnstableParametersError(
            f"fourth-order beta undefined near a={a}, q={q}")
    radicand = (a
                - (a - 1.0) * q * q / d1
                - (5.0 * a + 7.0) * q ** 4 / d2)
    if radicand < 0.0:
        raise UnstableParametersError(
            f"fourth-order radicand {radicand:.3e} < 0 at a={a}, q={q}")
    return math.sqrt(radicand)


@njit(cache=True)
def _monodromy_trace(a: float, q: float, n_steps: int) -> float:
    # RK4 over one pi-period of u'' + (a - 2 q cos 2 xi) u = 0
    h = math.pi / n_steps
    u1, v1 = 1.0, 0.0
    u2, v2 = 0.0, 1.0
    xi = 0.0
    for _ in range(n_steps):
        c0 = -(a - 2.0 * q * math.cos(2.0 * xi))
        ch = -(a - 2.0 * q * math.cos(2.0 * (xi + 0.5 * h)))
        c1 = -(a - 2.0 * q * math.cos(2.0 * (xi + h)))

        k1u = v1
        k1v = c0 * u1
        k2u = v1 + 0.5 * h * k1v
        k2v = ch * (u1 + 0.5 * h * k1u)
        k3u = v1 + 0.5 * h * k2v
        k3v = ch * (u1 + 0.5 * h * k2u)
        k4u = v1 + h * k3v
        k4v = c1 * (u1 + h * k3u)
        u1 += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
        v1 += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)

        k1u = v2
        k1v = c0 * u2
        k2u = v2 + 0.5 * h * k1v
        k2v = ch * (u2 + 0.5 * h * k1u)
        k3u = v2 + 0.5 * h * k2v
        k3v = ch * (u2 + 0.5 * h * k2u)
        k4u = v2 + h * k3v
        k4v = c1 * (u2 + h * k3u)
        u2 += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
        v2 += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)

        xi += h
    return u1 + v2


def _converged_trace(a: float, q: float) -> float:
    n = 256
    trace = _monodromy_trace(a, q, n)
    while n < 131072:
        n *= 2
        refined = _monodromy_trace(a, q, n)
        if abs(refined - trace) < 1e-10:
            return refined
        trace = refined
    return trace


def beta_floquet(a: float, q: float) -> float:
    """Characteristic exponent from the monodromy matrix (exact oracle)."""
    trace = _converged_trace(a, q)
    if abs(trace) > 2.0:
        raise UnstableParametersError(
            f"(a={a}, q={q}) outside the stability region: |tr M| = "
            f"{abs(trace):.4f} > 2")
    return math.acos(max(-1.0, min(1.0, 0.5 * trace))) / math.pi


def is_stable(a: float, q: float) -> bool:
    return abs(_converged_trace(a, q)) <= 2.0


def stability_grid(a_values, q_values) -> np.ndarray:
    """Boolean stability map over the (a, q) grid, rows follow a_values."""
    a_values = np.asarray(a_values, dtype=float)
    q_values = np.asarray(q_values, dtype=float)
    out = np.empty((a_values.size, q_values.size), dtype=bool)
    for i, a in enumerate(a_values):
        for j, q in enumerate(q_values):
            out[i, j] = abs(_monodromy_trace(a, q, 2048)) <= 2.0
    return out


# ---------------------------------------------------------------------------
# secular frequencies


def secular_frequency_ladder(beta: float, omega: float,
                             n_max: int) -> list[float]:
    """Angular frequencies (n +- beta/2) Omega, fundamental first."""
    if not 0.0 < beta < 1.0:
        raise UnstableParametersError(f"beta = {beta} outside (0, 1)")
    ladder = [0.5 * beta * omega]
    for n in range(1, n_max + 1):
        ladder.append((n - 0.5 * beta) * omega)
        ladder.append((n + 0.5 * beta) * omega)
    return ladder


def secular_frequencies(params: StabilityParams, omega: float,
                        method: str = "floquet") -> SecularFrequencies:
    """Fundamental frequencies for all three axes from one beta method."""
    fn = {"dehmelt": beta_dehmelt, "fourth_order": beta_fourth_order,
          "floquet": beta_floquet}[method]
    betas = {}
    for u in ("x", "y", "z"):
        a, q = params.axis(u)
        betas[u] = fn(a, q) if (a, q) != (0.0, 0.0) else 0.0
    return SecularFrequencies(
        omega_x=0.5 * betas["x"] * omega,
        omega_y=0.5 * betas["y"] * omega,
        omega_z=0.5 * betas["z"] * omega,
        beta_x=betas["x"], beta_y=betas["y"], beta_z=betas["z"],
        method=method)


def linear_radial_frequency(species: IonSpecies, V: float, omega: float,
                            r0: float) -> float:
    """Ideal both-pairs-driven radial fundamental, |a| << |q| regime.

    Real grounded-pair traps develop a weaker quadrupole; treat this as
    an upper reference, not a prediction for the built geometry.
    """
    if omega <= 0 or r0 <= 0:
        raise TrapSimError("omega and r0 must be positive")
    return 2.0 * species.charge * V / (
        math.sqrt(2.0) * species.mass * omega * r0 * r0)


def linear_axial_frequency(species: IonSpecies, kappa: float, U0: float,
                           z0: float) -> float:
    radicand = 2.0 * species.charge * kappa * U0 / (species.mass * z0 * z0)
    if radicand < 0.0:
        raise UnstableParametersError(
            "axial anti-confinement: e*kappa*U0 < 0")
    return math.sqrt(radicand)


# ---------------------------------------------------------------------------
# inverse estimates


def _invert_fourth_order(beta: float) -> float:
    # beta_fourth_order(0, q) is monotone on (0, Q_CRITICAL)
    lo, hi = 0.0, Q_CRITICAL
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if beta_fourth_order(0.0, mid) < beta:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def estimate_efficiency(omega_z_sim: float, species: IonSpecies, V: float,
                        omega: float, z0: float,
                        floquet_polish: bool = False) -> float:
    """Efficiency from a simulated axial fundamental at the U = 0 point.

    Inverts beta(0, q_z) by bisection on the fourth-order formula.  When
    ``floquet_polish`` is set, one secant step against the Floquet beta
    removes the residual fourth-order model error (the default keeps the
    inversion an exact round trip of the fourth-order formula).
    """
    beta_z = 2.0 * omega_z_sim / omega
    if not 0.0 < beta_z < 1.0:
        raise UnstableParametersError(
            f"beta_z = {beta_z:.4f} outside (0, 1): not a fundamental")
    q = _invert_fourth_order(beta_z)
    if floquet_polish:
        db = 1e-4
        slope = (beta_fourth_order(0.0, q + db)
                 - beta_fourth_order(0.0, q - db)) / (2.0 * db)
        q -= (beta_floquet(0.0, q) - beta_z) / slope
    return q * species.mass * z0 * z0 * omega * omega / (
        2.0 * species.charge * V)


def estimate_geometric_factor(omega_z_sim: float, species: IonSpecies,
                              U0: float, z0: float) -> float:
    """kappa from a simulated axial fundamental of the linear trap."""
    if U0 <= 0:
        raise TrapSimError("U0 must be positive")
    return (species.mass * z0 * z0 * omega_z_sim * omega_z_sim
            / (2.0 * species.charge * U0))


# ---------------------------------------------------------------------------
# analytic field providers (duck-typed like the BEM drive field)


class IdealQuadrupoleField:
    """Analytic drive field of the rotationally symmetric quadrupole."""

    def __init__(self, r0: float, z0: float, U: float, V: float,
                 omega: float, phase: float = 0.0):
        self.r0 = r0
        self.z0 = z0
        self.U = U
        self.V = V
        self.omega = omega
        self.phase = phase
        self._denom = r0 * r0 + 2.0 * z0 * z0
        if self._denom == 0.0:
            raise TrapSimError("degenerate quadrupole: r0^2 + 2 z0^2 = 0")

    @property
    def rf_omega(self) -> float:
        return self.omega

    def _gradient(self, points):
        p = np.atleast_2d(np.asarray(points, dtype=float))
        grad = np.column_stack([2.0 * p[:, 0], 2.0 * p[:, 1], -4.0 * p[:, 2]])
        return grad / self._denom

    def drive_parts(self, points):
        grad = self._gradient(points)
        a = -self.U * grad
        b = -self.V * math.cos(self.phase) * grad
        c = self.V * math.sin(self.phase) * grad
        return a, b, c

    def fields(self, points, t: float):
        a, b, c = self.drive_parts(points)
        return a + b * math.cos(self.omega * t) + c * math.sin(self.omega * t)

    def potential(self, points, t: float):
        p = np.atleast_2d(np.asarray(points, dtype=float))
        r = np.hypot(p[:, 0], p[:, 1])
        drive = self.U + self.V * math.cos(self.omega * t + self.phase)
        g = (r * r - 2.0 * p[:, 2] ** 2 + 2.0 * self.z0 ** 2) / self._denom
        return g * drive


class LinearQuadrupoleField:
    """Analytic two-dimensional quadrupole of an ideal linear trap."""

    def __init__(self, r0: float, U: float, V: float, omega: float,
                 phase: float = 0.0):
        if r0 <= 0:
            raise TrapSimError("r0 must be positive")
        self.r0 = r0
        self.U = U
        self.V = V
        self.omega = omega
        self.phase = phase

    @property
    def rf_omega(self) -> float:
        return self.omega

    def _gradient(self, points):
        p = np.atleast_2d(np.asarray(points, dtype=float))
        z = np.zeros(p.shape[0])
        return np.column_stack([2.0 * p[:, 0], -2.0 * p[:, 1], z]) / self.r0 ** 2

    def drive_parts(self, points):
        grad = self._gradient(points)
        return (-self.U * grad,
                -self.V * math.cos(self.phase) * grad,
                self.V * math.sin(self.phase) * grad)

    def fields(self, points, t: float):
        a, b, c = self.drive_parts(points)
        return a + b * math.cos(self.omega * t) + c * math.sin(self.omega * t)

    def potential(self, points, t: float):
        p = np.atleast_2d(np.asarray(points, dtype=float))
        drive = self.U + self.V * math.cos(self.omega * t + self.phase)
        return (p[:, 0] ** 2 - p[:, 1] ** 2) / self.r0 ** 2 * drive


class StaticHarmonicField:
    """Phi = k' (x^2 + y^2 + z^2) / (2 e): an isotropic test well."""

    def __init__(self, spring_constant: float, charge: float):
        self.k = spring_constant
        self.charge = charge

    @property
    def rf_omega(self) -> float:
        return 0.0

    def drive_parts(self, points):
        p = np.atleast_2d(np.asarray(points, dtype=float))
        a = -(self.k / self.charge) * p
        zeros = np.zeros_like(a)
        return a, zeros, zeros

    def fields(self, points, t: float):
        return self.drive_parts(points)[0]

    def potential(self, points, t: float = 0.0):
        p = np.atleast_2d(np.asarray(points, dtype=float))
        return 0.5 * self.k * np.sum(p * p, axis=1) / self.charge
