import math

import numpy as np
import pytest

from trapsim import fieldcache as fc
from trapsim import mathieu as mt
from trapsim.errors import PointOutsideGridError, SolverError


class _WigglyField:
    """Deliberately under-resolved provider: E = sin(k x) x_hat."""

    def __init__(self, k):
        self.k = k
        self.rf_omega = 2.0 * math.pi * 1e6

    def drive_parts(self, points):
        p = np.atleast_2d(np.asarray(points, dtype=float))
        a = np.zeros_like(p)
        b = np.zeros_like(p)
        b[:, 0] = np.sin(self.k * p[:, 0])
        return a, b, np.zeros_like(p)


@pytest.fixture(scope="module")
def quad_cache(ideal_q04):
    return fc.build_field_cache(ideal_q04, (0.0, 0.0, 0.0),
                                (2e-4, 2e-4, 2e-4))


def test_cache_reproduces_smooth_field(quad_cache, ideal_q04):
    rng = np.random.default_rng(3)
    pts = (rng.random((50, 3)) - 0.5) * 3e-4
    ca, cb, cc = quad_cache.drive_parts(pts)
    da, db, dc = ideal_q04.drive_parts(pts)
    scale = np.abs(db).max()
    assert np.allclose(ca, da, atol=1e-9 * scale)
    assert np.allclose(cb, db, atol=1e-9 * scale)
    assert np.allclose(cc, dc, atol=1e-9 * scale)
    assert quad_cache.max_rel_error < 1e-6


def test_cache_time_combination(quad_cache, ideal_q04):
    pts = np.array([[1e-4, -5e-5, 8e-5]])
    for t in (0.0, 3.1e-8, 7.7e-8):
        assert np.allclose(quad_cache.fields(pts, t),
                           ideal_q04.fields(pts, t), rtol=1e-8)


def test_cache_rf_omega(quad_cache, ideal_q04):
    assert quad_cache.rf_omega == ideal_q04.rf_omega


def test_point_outside_cache_raises(quad_cache):
    with pytest.raises(PointOutsideGridError):
        quad_cache.drive_parts([[5e-4, 0.0, 0.0]])


def test_contains(quad_cache):
    inside = quad_cache.contains([[0.0, 0.0, 0.0], [4.9e-4, 0.0, 0.0]])
    assert inside[0] and not inside[1]


def test_bounds_leave_guard_layer(quad_cache):
    lo, hi = quad_cache.bounds
    assert np.all(lo > quad_cache.origin)
    dims = np.array(quad_cache.values.shape[:3])
    outer = quad_cache.origin + (dims - 1) * quad_cache.spacing
    assert np.all(hi < outer)


def test_under_resolved_provider_rejected():
    # one period of sin across two nodes cannot satisfy 1e-3
    wig = _WigglyField(k=2.0 * math.pi / 1e-5)
    with pytest.raises(SolverError):
        fc.build_field_cache(wig, (0.0, 0.0, 0.0), 1e-4, nodes=17)


def test_verify_can_be_skipped():
    wig = _WigglyField(k=2.0 * math.pi / 1e-5)
    cache = fc.build_field_cache(wig, (0.0, 0.0, 0.0), 1e-4, nodes=17,
                                 verify=False)
    assert cache.max_rel_error == 0.0


def test_default_cache_box(endcap_geometry):
    box = fc.default_cache_box(endcap_geometry)
    assert np.allclose(box, 84e-6)


def test_static_provider_cache():
    well = mt.StaticHarmonicField(1e-15, mt.SR88.charge)
    cache = fc.build_field_cache(well, (0.0, 0.0, 0.0), 1e-4)
    assert cache.rf_omega == 0.0
    pts = np.array([[3e-5, -1e-5, 2e-5]])
    assert np.allclose(cache.fields(pts, 0.0), well.fields(pts, 0.0),
                       rtol=1e-9)
