import math

import numpy as np
import pytest
from scipy.optimize import brentq
from scipy.special import ellipe, ellipeinc, ellipk, ellipkinc

from sh2synth.errors import DomainError, NumericFailure, OriginExcludedError
from sh2synth.expmap import GeodesicSpec, GroupPoint, exp, exp_spec
from sh2synth.optimality import in_d1, in_d2, tt
from sh2synth.pendulum import Covector, Stratum, classify, modulus
from sh2synth.plane import gamma_curves
from sh2synth.symmetry import reflect_m, reflect_n
from sh2synth.synthesis import (
    CONJ_CUT_UNIQUE,
    INTERIOR_UNIQUE,
    MAXWELL_PAIR,
    REST_UNIQUE,
    SolverConfig,
    cut_time_ok,
    distance,
    distance_batch,
    minimizers,
    solve_interior,
    solve_interior_batch,
    solve_plane,
)

TWO_PI = 2 * math.pi


def _gap(a, b):
    d = (a - b) % (4 * math.pi)
    return min(d, 4 * math.pi - d)


def _a(k):
    m = k * k
    return ellipe(m) - (1 - m) * ellipk(m)


def _m1_point(u, k):
    kp2 = 1 - k * k
    return 4 * k * _a(k) * math.cos(u) / kp2, -4 * _a(k) * math.sqrt(1 - k * k * math.sin(u) ** 2) / kp2


def _m3_point(u, k):
    kp2, e = 1 - k * k, ellipe(k * k)
    return 4 * e * math.sqrt(1 - k * k * math.sin(u) ** 2) / kp2, -4 * k * e * math.cos(u) / kp2


def _m2_point(u, k):
    m, kp2 = k * k, 1 - k * k
    f, e = ellipkinc(u, m), ellipeinc(u, m)
    alpha = e - kp2 * f
    root = math.sqrt(1 - m * math.sin(u) ** 2)
    x = 2 * k / kp2 * (math.sin(u) * root - math.cos(u) * alpha)
    y = -2 / kp2 * (root * alpha - m * math.sin(u) * math.cos(u))
    return x, y, 2 * k * f


def _check_result(res, q, tol=1e-7):
    for nu in res.minimizers:
        p = exp_spec(nu).as_array()
        assert np.max(np.abs(p - np.array(q))) <= tol * max(1.0, np.max(np.abs(q)))
        assert cut_time_ok(nu)
        assert nu.t == pytest.approx(res.distance, abs=1e-12)


# plane examples ----------------------------------------------------------------------

def test_point_on_gamma4():
    res = minimizers((math.pi, 0.0, 0.0))
    assert res.classification == REST_UNIQUE and len(res.minimizers) == 1
    nu = res.minimizers[0]
    assert classify(nu.lam).component == "C4^0" and nu.t == pytest.approx(math.pi)
    _check_result(res, (math.pi, 0.0, 0.0))


def test_conjugate_point_p():
    res = minimizers((TWO_PI, 0.0, 0.0))
    assert res.classification == CONJ_CUT_UNIQUE and len(res.minimizers) == 1
    assert res.distance == pytest.approx(TWO_PI)
    _check_result(res, (TWO_PI, 0.0, 0.0))


def test_maxwell_point_in_m1():
    q = (1.0, -10.0, 0.0)
    res = minimizers(q)
    assert res.classification == MAXWELL_PAIR and len(res.minimizers) == 2
    k = brentq(lambda k: 16 * _a(k) ** 2 / (1 - k * k) - 99.0, 1e-6, 1 - 1e-12, xtol=1e-15)
    assert res.distance == pytest.approx(4 * k * ellipk(k * k), rel=1e-9)
    _check_result(res, q)
    a, b = res.minimizers
    assert a.lam != b.lam


@pytest.mark.parametrize("u", [0.2, 0.8, 1.4])
@pytest.mark.parametrize("k", [0.15, 0.5, 0.85])
def test_m1_chart_forward_regression(u, k):
    x, y = _m1_point(u, k)
    res = minimizers((x, y, 0.0))
    assert res.classification == MAXWELL_PAIR
    assert res.distance == pytest.approx(4 * k * ellipk(k * k), rel=1e-9)
    assert modulus(res.minimizers[0].lam) == pytest.approx(k, rel=1e-9)
    _check_result(res, (x, y, 0.0))


@pytest.mark.parametrize("u", [0.2, 0.8, 1.4])
@pytest.mark.parametrize("k", [0.15, 0.5, 0.85])
def test_m3_chart_forward_regression(u, k):
    x, y = _m3_point(u, k)
    res = minimizers((x, y, 0.0))
    assert res.classification == MAXWELL_PAIR
    assert res.distance == pytest.approx(4 * ellipk(k * k), rel=1e-9)
    assert modulus(res.minimizers[0].lam) == pytest.approx(k, rel=1e-9)
    _check_result(res, (x, y, 0.0))


@pytest.mark.parametrize("u", [0.3, 0.9, 1.4])
@pytest.mark.parametrize("k", [0.2, 0.6, 0.9])
def test_m2_chart_targets(u, k):
    x, y, t = _m2_point(u, k)
    res = minimizers((x, y, 0.0))
    assert res.classification == REST_UNIQUE and len(res.minimizers) == 1
    assert res.distance == pytest.approx(t, rel=1e-8)
    _check_result(res, (x, y, 0.0))


def test_curve_strata_classifications():
    for k in (0.3, 0.7):
        x, y = gamma_curves(3, k)
        res = minimizers((x, y, 0.0))
        assert res.classification == CONJ_CUT_UNIQUE
        assert res.distance == pytest.approx(4 * ellipk(k * k), rel=1e-9)
        _check_result(res, (x, y, 0.0))
        x, y = gamma_curves(5, k)
        res = minimizers((x, y, 0.0))
        assert res.classification == MAXWELL_PAIR
        _check_result(res, (x, y, 0.0))
        x, y = gamma_curves(2, k)
        res = minimizers((x, y, 0.0))
        assert res.classification == CONJ_CUT_UNIQUE
        assert res.distance == pytest.approx(4 * k * ellipk(k * k), rel=1e-9)
        _check_result(res, (x, y, 0.0))
    res = minimizers((0.0, -5.0, 0.0))
    assert res.classification == MAXWELL_PAIR
    _check_result(res, (0.0, -5.0, 0.0))


def test_maxwell_pairs_related_by_pairing_reflection(rng):
    pts = [(1.0, -10.0), (12.0, -2.0), (0.0, -5.0), (0.0, 4.0), (-9.0, 0.0), (-3.0, 7.0),
           (8.0, 0.0), (-1.0, 6.0)]
    for x, y in pts:
        res = minimizers((x, y, 0.0))
        assert res.classification == MAXWELL_PAIR
        a, b = res.minimizers
        mapped = reflect_n(res.pairing, a)
        assert _gap(mapped.lam.gamma, b.lam.gamma) <= 1e-8
        assert mapped.lam.c == pytest.approx(b.lam.c, abs=1e-8)
        assert mapped.t == b.t


def test_distance_along_x_axis():
    for t in np.linspace(0.1, TWO_PI, 9):
        assert distance((float(t), 0.0, 0.0)) == pytest.approx(t, abs=1e-12)


# interior ----------------------------------------------------------------------------

def test_vertical_axis():
    for z, g in ((1.0, math.pi), (-2.5, 3 * math.pi)):
        nu = solve_interior((0.0, 0.0, z))
        assert classify(nu.lam).stratum is Stratum.C5
        assert _gap(nu.lam.gamma, g) <= 1e-12 and nu.t == abs(z)
    assert distance((0.0, 0.0, 1.0)) == 1.0


def _sample_d(rng, n):
    out = []
    while len(out) < n:
        lam = Covector(rng.uniform(0, 4 * math.pi), rng.uniform(-3.5, 3.5))
        nu = GeodesicSpec(lam, float(rng.uniform(0.05, 1.0)) * min(tt(lam), 20.0))
        if not (in_d1(nu) or in_d2(nu)):
            continue
        if abs(exp_spec(nu).z) <= 1e-3:
            continue
        out.append(nu)
    return out


def test_interior_round_trip(rng):
    for nu in _sample_d(rng, 150):
        got = solve_interior(exp_spec(nu))
        assert _gap(got.lam.gamma, nu.lam.gamma) <= 1e-6
        assert got.lam.c == pytest.approx(nu.lam.c, abs=1e-6)
        assert got.t == pytest.approx(nu.t, abs=1e-6)


def test_interior_equivariance(rng):
    for nu in _sample_d(rng, 40):
        q = reflect_m(3, exp_spec(nu))
        got = solve_interior(q)
        want = reflect_n(3, nu)
        assert _gap(got.lam.gamma, want.lam.gamma) <= 1e-6
        assert got.lam.c == pytest.approx(want.lam.c, abs=1e-6)
        assert got.t == pytest.approx(want.t, abs=1e-6)


def test_interior_results_are_unique_and_optimal(rng):
    for x, y, z in rng.uniform(-5, 5, size=(60, 3)):
        res = minimizers((x, y, z))
        assert res.classification == INTERIOR_UNIQUE and len(res.minimizers) == 1
        assert res.residual <= 1e-7 * max(1.0, abs(x), abs(y), abs(z))
        _check_result(res, (x, y, z))


def test_distance_invariant_under_reflections(rng):
    pts = rng.uniform(-4, 4, size=(30, 3))
    base = distance_batch(pts)
    for i in range(1, 8):
        refl = np.array([reflect_m(i, GroupPoint(*p)).as_array() for p in pts])
        np.testing.assert_allclose(distance_batch(refl), base, atol=1e-8)


def test_distance_continuous_across_rest_region():
    for u, k in ((0.5, 0.4), (1.1, 0.8)):
        x, y, _ = _m2_point(u, k)
        d0 = distance((x, y, 0.0))
        for z in (1e-6, -1e-6):
            assert abs(distance((x, y, z)) - d0) < 1e-4


def test_batch_interior_matches_scalar(rng):
    pts = rng.uniform(-3, 3, size=(20, 3))
    mid, res, ok = solve_interior_batch(pts)
    assert ok.all() and res.max() <= 1e-10
    for p, row in zip(pts, mid):
        assert row[2] == pytest.approx(solve_interior(tuple(p)).t, abs=1e-10)
    pts[3, 2] = 0.0
    pts[5] = (2.0, 0.0, 0.0)
    d = distance_batch(pts)
    assert d[5] == pytest.approx(2.0)
    assert d[3] == pytest.approx(distance(tuple(pts[3])), abs=1e-12)


# errors ------------------------------------------------------------------------------

def test_error_paths():
    with pytest.raises(OriginExcludedError):
        minimizers((0.0, 0.0, 0.0))
    with pytest.raises(OriginExcludedError):
        solve_plane((0.0, 0.0, 0.0))
    assert distance((0.0, 0.0, 0.0)) == 0.0
    with pytest.raises(DomainError):
        solve_plane((1.0, 1.0, 0.5))
    with pytest.raises(DomainError):
        solve_interior_batch([(1.0, 1.0, 0.0)])
    with pytest.raises(DomainError):
        solve_interior_batch([(1.0, 1.0)])
    with pytest.raises(NumericFailure) as info:
        solve_interior((3.0, -1.0, 0.7), SolverConfig(max_iter=0, tol=1e-300))
    assert info.value.residual > 0.0
