import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sh2synth.errors import DomainError
from sh2synth.expmap import GeodesicSpec, GroupPoint, exp, exp_spec
from sh2synth.pendulum import Covector, energy
from sh2synth.symmetry import (
    TIME_REVERSING,
    is_time_reversing,
    plane_signs,
    reflect_c,
    reflect_m,
    reflect_n,
)

coords = st.floats(-5.0, 5.0)
heights = st.floats(-3.0, 3.0)
indices = st.integers(0, 7)


def _close(p, q, tol=1e-12):
    a, b = p.as_array(), q.as_array()
    return np.max(np.abs(a - b)) <= tol * max(1.0, np.max(np.abs(b)))


def _same_covector(a, b, tol=1e-12):
    d = (a.gamma - b.gamma) % (4 * math.pi)
    return min(d, 4 * math.pi - d) <= tol and abs(a.c - b.c) <= tol


def test_covector_examples():
    lam = Covector(0.5, 1.2)
    want = {
        1: (0.5, -1.2),
        2: (4 * math.pi - 0.5, 1.2),
        3: (4 * math.pi - 0.5, -1.2),
        4: (2 * math.pi + 0.5, 1.2),
        5: (2 * math.pi + 0.5, -1.2),
        6: (2 * math.pi - 0.5, 1.2),
        7: (2 * math.pi - 0.5, -1.2),
    }
    for i, (g, c) in want.items():
        got = reflect_c(i, lam)
        assert (got.gamma, got.c) == pytest.approx((g, c), abs=1e-14)
    assert reflect_c(0, lam) is lam


def test_point_examples():
    q = GroupPoint(1.0, 2.0, 0.5)
    assert tuple(reflect_m(3, q)) == (1.0, -2.0, -0.5)
    assert tuple(reflect_m(4, q)) == (-1.0, 2.0, -0.5)
    assert tuple(reflect_m(7, q)) == (-1.0, -2.0, 0.5)
    flat = GroupPoint(1.0, 2.0, 0.0)
    assert tuple(reflect_m(1, flat)) == (1.0, -2.0, 0.0)
    assert tuple(reflect_m(2, flat)) == (1.0, 2.0, 0.0)
    assert tuple(reflect_m(5, flat)) == (-1.0, -2.0, 0.0)
    assert tuple(reflect_m(6, flat)) == (-1.0, 2.0, 0.0)
    ch, sh = math.cosh(0.5), math.sinh(0.5)
    assert tuple(reflect_m(1, q)) == pytest.approx((ch - 2 * sh, sh - 2 * ch, 0.5), rel=1e-15)


def test_index_checks():
    assert TIME_REVERSING == {1, 2, 5, 6}
    assert [is_time_reversing(i) for i in range(8)] == [False, True, True, False,
                                                         False, True, True, False]
    for bad in (-1, 8):
        with pytest.raises(DomainError):
            reflect_c(bad, Covector(0.1, 0.1))
        with pytest.raises(DomainError):
            reflect_m(bad, GroupPoint(0.0, 0.0, 0.0))
        with pytest.raises(DomainError):
            plane_signs(bad)


@pytest.mark.parametrize("i", range(8))
def test_plane_signs_match_point_action(i):
    sx, sy = plane_signs(i)
    q = reflect_m(i, GroupPoint(1.5, -0.7, 0.0))
    assert (q.x, q.y, q.z) == pytest.approx((1.5 * sx, -0.7 * sy, 0.0), abs=1e-15)


@given(indices, st.floats(0.0, 4 * math.pi, exclude_max=True), st.floats(-4.0, 4.0))
def test_covector_reflections_are_involutions_preserving_energy(i, g, c):
    lam = Covector(g, c)
    assert _same_covector(reflect_c(i, reflect_c(i, lam)), lam)
    assert energy(reflect_c(i, lam)) == pytest.approx(energy(lam), abs=1e-13)


@given(indices, coords, coords, heights)
def test_point_reflections_are_involutions(i, x, y, z):
    q = GroupPoint(x, y, z)
    assert _close(reflect_m(i, reflect_m(i, q)), q, 1e-11)


@given(indices, indices, coords, coords, heights)
def test_point_reflections_compose_by_xor(i, j, x, y, z):
    q = GroupPoint(x, y, z)
    assert _close(reflect_m(i, reflect_m(j, q)), reflect_m(i ^ j, q), 1e-11)


@given(indices, indices, st.floats(0.0, 4 * math.pi, exclude_max=True), st.floats(-4.0, 4.0))
def test_covector_reflections_compose_by_xor(i, j, g, c):
    lam = Covector(g, c)
    assert _same_covector(reflect_c(i, reflect_c(j, lam)), reflect_c(i ^ j, lam), 1e-11)


@given(indices, coords, coords, heights)
def test_reflections_preserve_invariants(i, x, y, z):
    # x^2 - y^2 and |z| are invariant under all eight maps
    q = reflect_m(i, GroupPoint(x, y, z))
    scale = max(1.0, x * x + y * y) * math.cosh(z) ** 2
    assert q.x**2 - q.y**2 == pytest.approx(x * x - y * y, abs=1e-11 * scale)
    assert abs(q.z) == pytest.approx(abs(z), abs=1e-15)


@given(indices, st.floats(0.0, 4 * math.pi, exclude_max=True), st.floats(-3.0, 3.0),
       st.floats(0.0, 8.0))
def test_exp_is_equivariant(i, g, c, t):
    nu = GeodesicSpec(Covector(g, c), t)
    got = exp_spec(reflect_n(i, nu))
    want = reflect_m(i, exp_spec(nu))
    assert np.max(np.abs(got.as_array() - want.as_array())) <= 1e-9 * math.cosh(want.z) ** 2


def test_geodesic_reflection_keeps_time():
    nu = GeodesicSpec(Covector(0.4, 0.9), 2.5)
    for i in range(8):
        assert reflect_n(i, nu).t == 2.5
    # a time-reversing reflection starts from the reflected end covector
    q = exp(Covector(0.4, 0.9), 2.5)
    r = exp_spec(reflect_n(1, nu))
    assert _close(r, reflect_m(1, q), 1e-12)
