import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import ellipeinc, ellipj, ellipk

from sh2synth.errors import DomainError
from sh2synth.expmap import GeodesicSpec, exp
from sh2synth.optimality import (
    OptimalityBounds,
    bounds,
    conj_time_numeric,
    cut_time,
    f1,
    f2,
    in_d1,
    in_d2,
    in_ntilde,
    jacobian_det,
    p11_root,
    t1_conj_bounds,
    t1_max,
    tt,
    tt_of_energy,
)
from sh2synth.pendulum import Covector, Stratum, classify, energy, modulus, to_elliptic
from sh2synth.symmetry import reflect_c

TWO_PI = 2 * math.pi
K_GRID = [0.1 * i for i in range(1, 10)]


def _c1(k, gamma_side=0):
    # turning point gamma = 2 asin k, shifted by 2pi for the C1^1 component
    return Covector(2 * math.asin(k) + TWO_PI * gamma_side, 0.0)


def _c2(k, sign=1):
    return Covector(0.0, sign * 2.0 / k)


def _f1_scipy(p, k):
    sn, cn, dn, ph = ellipj(p, k * k)
    return cn * ellipeinc(ph, k * k) - sn * dn


# first Maxwell time ------------------------------------------------------------------

def test_t1_max_examples():
    assert t1_max(_c1(0.9)) == pytest.approx(4 * ellipk(0.81), rel=1e-14)
    assert t1_max(_c2(0.5)) == pytest.approx(2 * ellipk(0.25), rel=1e-14)
    assert math.isinf(t1_max(Covector(0.5, 2 * math.cos(0.25))))
    assert math.isinf(t1_max(Covector(math.pi, 0.0)))


def test_f_examples():
    for k in (0.3, 0.7):
        assert f1(0.0, k) == 0.0 and f2(0.0, k) == 0.0
        for p in (0.4, 1.9, 5.0):
            assert f1(p, k) == pytest.approx(_f1_scipy(p, k), abs=1e-13)
    with pytest.raises(DomainError):
        f1(1.0, 1.0)
    with pytest.raises(DomainError):
        f2(1.0, 0.0)


@pytest.mark.parametrize("k", K_GRID)
def test_f2_positive_up_to_2k(k):
    big_k = ellipk(k * k)
    assert all(f2(p, k) > 0.0 for p in np.linspace(1e-3, 2 * big_k, 200))


@pytest.mark.parametrize("k", K_GRID)
def test_p11_root_in_bracket(k):
    big_k = ellipk(k * k)
    p = p11_root(k)
    assert 2 * big_k < p < 3 * big_k
    assert abs(f1(p, k)) <= 1e-10
    assert f1(p - 1e-6, k) * f1(p + 1e-6, k) < 0.0


def test_p11_root_matches_dense_grid():
    k = 0.5
    big_k = ellipk(k * k)
    ps = np.linspace(2 * big_k, 3 * big_k, 200001)
    vals = _f1_scipy(ps, k)
    i = int(np.flatnonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0])
    root = ps[i] - vals[i] * (ps[i + 1] - ps[i]) / (vals[i + 1] - vals[i])
    assert p11_root(k) == pytest.approx(root, abs=1e-6)


# bounds and the cut time -------------------------------------------------------------

def test_conj_bounds_examples():
    assert t1_conj_bounds(Covector(0.0, 0.0)) == (TWO_PI, TWO_PI)
    assert t1_conj_bounds(Covector(TWO_PI, 0.0)) == (TWO_PI, TWO_PI)
    lo, hi = t1_conj_bounds(Covector(math.pi, 0.0))
    assert math.isinf(lo) and math.isinf(hi)
    lo, hi = t1_conj_bounds(Covector(1.0, 2 * math.cos(0.5)))
    assert math.isinf(lo) and math.isinf(hi)


@pytest.mark.parametrize("k", K_GRID)
def test_conj_bounds_start_at_maxwell_time(k):
    for lam, scale in ((_c1(k), 1.0), (_c1(k, 1), 1.0), (_c2(k), k), (_c2(k, -1), k)):
        lo, hi = t1_conj_bounds(lam)
        assert lo == t1_max(lam)
        assert hi == pytest.approx(2 * scale * p11_root(k), rel=1e-15)
        assert lo < hi


def test_bounds_record():
    b = bounds(_c1(0.6))
    assert isinstance(b, OptimalityBounds)
    assert b.t_max1 == b.t_conj_lo == b.t_cut == t1_max(_c1(0.6))
    assert b.t_conj_hi == t1_conj_bounds(_c1(0.6))[1]


def test_cut_time_examples():
    assert cut_time(Covector(0.0, 0.0)) == TWO_PI
    assert cut_time(Covector(TWO_PI, 0.0)) == TWO_PI
    assert cut_time(_c1(0.9)) == pytest.approx(4 * ellipk(0.81), rel=1e-14)
    for lam in (Covector(math.pi, 0.0), Covector(0.3, -2 * math.cos(0.15))):
        assert math.isinf(cut_time(lam))
    assert cut_time is tt


@given(st.integers(0, 7), st.floats(0.0, 4 * math.pi, exclude_max=True), st.floats(-4.0, 4.0))
def test_tt_invariant_under_reflections(i, g, c):
    lam = Covector(g, c)
    a, b = tt(lam), tt(reflect_c(i, lam))
    assert a == b or a == pytest.approx(b, rel=1e-12)


@given(st.floats(-0.999, 30.0), st.floats(0.0, 4 * math.pi), st.floats(0.0, 4 * math.pi),
       st.booleans())
def test_tt_constant_on_energy_levels(e, g1, g2, flip):
    # two covectors on one level: c^2 = 2 (E + cos gamma)
    if abs(e - 1.0) < 1e-3:
        return
    pts = []
    for g in (g1, g2):
        rad = 2 * (e + math.cos(g))
        if rad < 0:
            return
        pts.append(Covector(g, (-1 if flip else 1) * math.sqrt(rad)))
    e0, e1 = energy(pts[0]), energy(pts[1])
    assert abs(e0 - e1) < 1e-12
    assert abs(tt(pts[0]) - tt(pts[1])) < 1e-9
    assert tt(pts[0]) == pytest.approx(tt_of_energy(e0), abs=1e-9)


def test_tt_of_energy_limits_and_monotonicity():
    assert tt_of_energy(-1.0) == TWO_PI
    assert math.isinf(tt_of_energy(1.0))
    with pytest.raises(DomainError):
        tt_of_energy(-1.5)
    below = [tt_of_energy(e) for e in np.linspace(-1 + 1e-6, 1 - 1e-3, 400)]
    above = [tt_of_energy(e) for e in np.linspace(1 + 1e-3, 100.0, 400)]
    assert below[0] == pytest.approx(TWO_PI, abs=1e-5)
    assert np.all(np.diff(below) > 0) and np.all(np.diff(above) < 0)
    assert tt_of_energy(1e8) < 1e-3
    # logarithmic blow-up at the separatrix, 4K ~ 2 ln(32 / (1 - E))
    for d in (1e-4, 1e-8, 1e-12):
        for t in (tt_of_energy(1 - d), tt_of_energy(1 + d)):
            assert t == pytest.approx(2 * math.log(32 / d), rel=1e-2)


@pytest.mark.xfail(strict=True, reason="tt grows like 2 ln(32/|E-1|); on the sampled "
                                       "window its largest value is about 20.7")
def test_tt_exceeds_thousand_on_sampled_window():
    below = [tt_of_energy(e) for e in np.linspace(-1 + 1e-6, 1 - 1e-3, 400)]
    above = [tt_of_energy(e) for e in np.linspace(1 + 1e-3, 100.0, 400)]
    assert max(below + above) > 1e3


# Jacobian and conjugate time ---------------------------------------------------------

def test_jacobian_nonzero_on_d1(rng):
    checked = 0
    while checked < 60:
        lam = Covector(rng.uniform(0, 4 * math.pi), rng.uniform(-3, 3))
        if classify(lam).stratum not in (Stratum.C1, Stratum.C2, Stratum.C3):
            continue
        nu = GeodesicSpec(lam, float(rng.uniform(0.05, 0.95)) * min(tt(lam), 15.0))
        if not in_d1(nu):
            continue
        assert abs(jacobian_det(nu)) > 1e-10
        checked += 1


def test_jacobian_changes_sign_at_c4_conjugate_time():
    lam = Covector(0.0, 0.0)
    a = jacobian_det(GeodesicSpec(lam, TWO_PI - 0.2))
    b = jacobian_det(GeodesicSpec(lam, TWO_PI + 0.2))
    assert a * b < 0.0


@pytest.mark.parametrize("g,c,t", [(0.7, 0.5, 3.0), (2.0, 3.0, 1.2), (7.5, -0.9, 5.0),
                                   (0.8, 2 * math.cos(0.4), 4.0)])
def test_jacobian_step_refinement(g, c, t):
    nu = GeodesicSpec(Covector(g, c), t)
    a, b = jacobian_det(nu, h=1e-4), jacobian_det(nu, h=5e-5)
    assert a == pytest.approx(b, rel=1e-4)


def test_conj_time_exact_values():
    assert conj_time_numeric(Covector(0.0, 0.0)) == TWO_PI
    assert math.isinf(conj_time_numeric(Covector(math.pi, 0.0)))
    assert math.isinf(conj_time_numeric(Covector(0.4, 2 * math.cos(0.2))))


@pytest.mark.parametrize("k", [0.2, 0.5, 0.8])
def test_conj_time_in_bracket_and_after_cut(k):
    for lam in (Covector(0.3, 0.0), _c1(k), Covector(0.0, 2.0 / k), Covector(1.0, -2.0 / k)):
        lo, hi = t1_conj_bounds(lam)
        tc = conj_time_numeric(lam)
        assert lo <= tc <= hi
        assert tc >= cut_time(lam)


def test_conj_time_matches_dense_scan():
    # a C2 covector with k = 0.6 at phase 0.7: no zero at the Maxwell time
    k = 0.6
    from sh2synth.pendulum import EllipticCoords, StratumTag, from_elliptic

    lam = from_elliptic(EllipticCoords(0.7, k, StratumTag(Stratum.C2, s2=1)))
    assert modulus(lam) == pytest.approx(k)
    lo, hi = t1_conj_bounds(lam)
    ts = np.linspace(lo + 1e-3, hi, 1500)
    dets = np.array([jacobian_det(GeodesicSpec(lam, float(t))) for t in ts])
    i = int(np.flatnonzero(np.sign(dets[:-1]) != np.sign(dets[1:]))[0])
    root = ts[i] - dets[i] * (ts[i + 1] - ts[i]) / (dets[i + 1] - dets[i])
    assert conj_time_numeric(lam) == pytest.approx(root, abs=1e-5)


# domains -----------------------------------------------------------------------------

def _table_domain(nu):
    """D1/D2 read from the tau ranges of the decomposition table."""
    lam, t = nu.lam, nu.t
    tag = classify(lam)
    e = to_elliptic(lam)
    if tag.stratum is Stratum.C3:
        tau = e.phi + t / 2
        first = tag.component in ("C3^0+", "C3^1-")
        return 1 if (tau > 0) == first else 2
    big_k = ellipk(e.k * e.k)
    tau = e.phi + t / 2 if tag.stratum is Stratum.C1 else (e.phi + t / 2) / e.k
    low_half = (tau % (4 * big_k)) < 2 * big_k
    first = tag.component in ("C1^0", "C2^+")
    return 1 if low_half == first else 2


def test_domains_agree_with_tau_table(rng):
    agree = total = 0
    while total < 10000:
        lam = Covector(rng.uniform(0, 4 * math.pi), rng.uniform(-3.5, 3.5))
        tag = classify(lam)
        if tag.stratum not in (Stratum.C1, Stratum.C2) or modulus(lam) < 1e-6:
            continue
        nu = GeodesicSpec(lam, float(rng.uniform(0.0, 1.0)) * tt(lam))
        want = _table_domain(nu)
        got = 1 if in_d1(nu) else 2 if in_d2(nu) else 0
        agree += got == want
        total += 1
    assert agree == total


def test_domains_on_separatrix_agree_with_tau_table(rng):
    for _ in range(500):
        g = float(rng.uniform(0, 4 * math.pi))
        lam = Covector(g, float(rng.choice([-1, 1])) * 2 * math.cos(g / 2))
        if classify(lam).stratum is not Stratum.C3:
            continue
        nu = GeodesicSpec(lam, float(rng.uniform(0.0, 20.0)))
        got = 1 if in_d1(nu) else 2 if in_d2(nu) else 0
        assert got == _table_domain(nu)


def test_domain_edges():
    nu = GeodesicSpec(Covector(math.pi, 0.0), 123.0)
    assert in_ntilde(nu)
    lam = _c1(0.6)
    for t in (tt(lam), tt(lam) + 1.0):
        nu = GeodesicSpec(lam, t)
        assert not in_d1(nu) and not in_d2(nu) and not in_ntilde(nu)
    nu = GeodesicSpec(Covector(0.0, 0.0), 1.0)
    assert not in_ntilde(nu)


@given(st.floats(0.0, 4 * math.pi, exclude_max=True), st.floats(-3.0, 3.0), st.floats(0.0, 1.0))
def test_d1_maps_to_upper_half_space(g, c, s):
    lam = Covector(g, c)
    nu = GeodesicSpec(lam, s * min(tt(lam), 20.0))
    if in_d1(nu) and nu.t > 1e-6:
        # on the closure of D1 (midpoint at sin = 0) z is zero up to rounding
        assert exp(lam, nu.t).z > -1e-12
