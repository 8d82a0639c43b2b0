import math

import pytest

from trapsim import heating as ht
from trapsim import mathieu as mt
from trapsim.errors import TrapSimError


def _inputs(**kw):
    base = dict(resistance=1.24, distance=1.2e-3,
                omega_u=2.0 * math.pi * 1.396e6, species=mt.CA40,
                temperature=300.0)
    base.update(kw)
    return ht.HeatingInputs(**base)


def test_reference_seconds_per_quantum():
    spq = ht.seconds_per_quantum(_inputs())
    assert spq == pytest.approx(0.670, rel=0.02)
    assert spq == pytest.approx(0.6704397616599443, rel=1e-12)


def test_rate_is_inverse_of_spq():
    inp = _inputs()
    assert ht.johnson_heating_rate(inp) * ht.seconds_per_quantum(inp) \
        == pytest.approx(1.0, rel=1e-14)


def test_rate_scalings():
    base = ht.johnson_heating_rate(_inputs())
    assert ht.johnson_heating_rate(_inputs(resistance=2.48)) \
        == pytest.approx(2.0 * base, rel=1e-12)
    assert ht.johnson_heating_rate(_inputs(temperature=600.0)) \
        == pytest.approx(2.0 * base, rel=1e-12)
    assert ht.johnson_heating_rate(_inputs(distance=2.4e-3)) \
        == pytest.approx(0.25 * base, rel=1e-12)
    assert ht.johnson_heating_rate(_inputs(omega_u=2 * math.pi * 2.792e6)) \
        == pytest.approx(0.5 * base, rel=1e-12)


def test_heavier_ion_heats_slower():
    ca = ht.johnson_heating_rate(_inputs())
    sr = ht.johnson_heating_rate(_inputs(species=mt.SR88))
    assert sr == pytest.approx(ca * mt.CA40.mass / mt.SR88.mass, rel=1e-12)


def test_lossless_electrode():
    assert ht.johnson_heating_rate(_inputs(resistance=0.0)) == 0.0
    assert ht.seconds_per_quantum(_inputs(resistance=0.0)) == math.inf


def test_input_validation():
    with pytest.raises(TrapSimError):
        _inputs(resistance=-1.0)
    with pytest.raises(TrapSimError):
        _inputs(distance=0.0)
    with pytest.raises(TrapSimError):
        _inputs(temperature=-10.0)


def test_skin_depth():
    assert ht.skin_depth(7.5e-8, 1.396e6) \
        == pytest.approx(1.166562614077879e-4, rel=1e-12)
    with pytest.raises(TrapSimError):
        ht.skin_depth(0.0, 1e6)


def test_electrode_resistance_bulk_and_skin():
    rho = 7.5e-8
    area = math.pi * (3e-4) ** 2
    bulk = ht.electrode_resistance(rho, 0.02, area)
    assert bulk == pytest.approx(rho * 0.02 / area, rel=1e-12)
    # at 16 MHz the skin depth is below the conductor radius
    skinned = ht.electrode_resistance(rho, 0.02, area,
                                      skin_frequency=15.955e6)
    assert skinned > bulk
    assert skinned == pytest.approx(0.023061511954398185, rel=1e-10)
    # at low frequency the correction is a no-op
    lo = ht.electrode_resistance(rho, 0.02, area, skin_frequency=10.0)
    assert lo == bulk
    with pytest.raises(TrapSimError):
        ht.electrode_resistance(rho, 0.02, 0.0)
