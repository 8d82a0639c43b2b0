"""Shared fixtures; the BEM bases are expensive so they are session scoped."""
import math

import pytest

from trapsim import geometry as ge
from trapsim import bem
from trapsim import mathieu as mt


@pytest.fixture(scope="session")
def quad_geometry():
    return ge.build_ideal_quadrupole(ge.IdealQuadrupoleParams())


@pytest.fixture(scope="session")
def quad_basis(quad_geometry):
    return bem.solve_charge_basis(quad_geometry)


@pytest.fixture(scope="session")
def endcap_geometry():
    return ge.build_npl_endcap(ge.EndcapTrapParams())


@pytest.fixture(scope="session")
def endcap_basis(endcap_geometry):
    return bem.solve_charge_basis(endcap_geometry)


@pytest.fixture(scope="session")
def ideal_q04(quad_geometry):
    """Analytic quadrupole drive tuned to q_z = 0.4 for Sr-88 at 10 MHz."""
    omega = 2.0 * math.pi * 10.0e6
    q_z = 0.4
    v = (q_z * mt.SR88.mass * omega ** 2
         * (quad_geometry.r0 ** 2 + 2.0 * quad_geometry.z0 ** 2)
         / (8.0 * mt.SR88.charge))
    return mt.IdealQuadrupoleField(quad_geometry.r0, quad_geometry.z0,
                                   0.0, v, omega)
