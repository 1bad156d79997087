"""Inverse exponential map, minimizers and sub-Riemannian distance.

Off the plane z = 0 every point has exactly one minimizer, found by a damped
Newton iteration in midpoint coordinates (gamma', c', t): gamma' is the pendulum
angle at t/2, so z > 0 corresponds to gamma' in (0, 2pi) and t < tt.  Points
with z < 0 are handled through the reflection eps^2.

On the plane the target is classified into one of the forty strata, reduced to
the quadrant x >= 0, y <= 0 and inverted through a closed-form chart; the
remaining minimizers are reflections of that one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.spatial import cKDTree

from . import kernels
from .elliptic import (
    a_fn,
    a_fn_vec,
    complete_E,
    complete_E_vec,
    complete_K,
    complete_K_vec,
    incomplete_F,
)
from .errors import DomainError, NumericFailure, OriginExcludedError
from .expmap import ORIGIN, GeodesicSpec, GroupPoint, exp
from .optimality import tt
from .pendulum import (
    Covector,
    EllipticCoords,
    Stratum,
    StratumTag,
    from_elliptic,
    pendulum_flow,
)
from .plane import (
    INDEX_TABLE,
    PlaneLabel,
    classify_plane,
    classify_plane_batch,
    cut_family,
    invert_curve_k,
)
from .symmetry import reflect_n

TWO_PI = 2.0 * math.pi

INTERIOR_UNIQUE = "interior-unique"
MAXWELL_PAIR = "maxwell-pair"
CONJ_CUT_UNIQUE = "conj-cut-unique"
REST_UNIQUE = "rest-unique"

_C1_POS = StratumTag(Stratum.C1, s1=1)
_C2_POS = StratumTag(Stratum.C2, s2=1)


@dataclass(frozen=True)
class SolverConfig:
    """Knobs of the inverse map.  Residuals are relative to |q|_inf."""

    tol: float = 1e-10
    plane_band: float = 1e-8
    curve_band: float = 1e-7
    max_iter: int = 60
    n_starts: int = 8
    seed_time_cap: float = 40.0


DEFAULT_CONFIG = SolverConfig()


@dataclass(frozen=True)
class SynthesisResult:
    minimizers: list[GeodesicSpec]
    distance: float
    classification: str
    residual: float
    label: PlaneLabel | None = None
    # reflection index carrying the first minimizer of a pair onto the second
    pairing: int | None = field(default=None)


def _as_point(q) -> GroupPoint:
    if isinstance(q, GroupPoint):
        return q
    x, y, z = (float(v) for v in q)
    return GroupPoint(x, y, z)


def _scale(q: np.ndarray) -> np.ndarray:
    return np.maximum(np.max(np.abs(q), axis=-1), 1e-300)


# Interior solver ---------------------------------------------------------------

def tt_vec(g, c) -> np.ndarray:
    """Vectorized cut-time function tt on midpoint covectors."""
    g = np.asarray(g, dtype=float)
    c = np.asarray(c, dtype=float)
    hc = 0.5 * np.abs(c)
    co = np.abs(np.cos(0.5 * g))
    e_minus = 2.0 * (hc - co) * (hc + co)
    r = np.hypot(hc, np.sin(0.5 * g))
    out = np.full(g.shape, np.inf)
    osc = e_minus < -1e-9
    rot = e_minus > 1e-9
    out[osc] = 4.0 * complete_K_vec(np.minimum(r[osc], np.nextafter(1.0, 0.0)))
    k = np.minimum(1.0 / r[rot], np.nextafter(1.0, 0.0))
    out[rot] = 4.0 * k * complete_K_vec(k)
    return out


def _in_d1(x: np.ndarray) -> np.ndarray:
    g, c, t = x[..., 0], x[..., 1], x[..., 2]
    return (g > 0.0) & (g < TWO_PI) & (t > 0.0) & (t < tt_vec(g, c))


def _forward(x: np.ndarray) -> np.ndarray:
    return kernels.exp_mid_batch(x[:, 0], x[:, 1], x[:, 2])


def _features(q: np.ndarray) -> np.ndarray:
    return np.arcsinh(q)


@lru_cache(maxsize=4)
def _seed_table(cap: float):
    n_g, n_v = 24, 31
    g = (np.arange(n_g) + 0.5) * (TWO_PI / n_g)
    c = 2.0 * np.sinh(np.linspace(-4.5, 4.5, n_v))
    s = np.array([0.01, 0.04, 0.1, 0.18, 0.28, 0.4, 0.52, 0.64, 0.75, 0.85, 0.93, 0.985])
    gg, cc, ss = np.meshgrid(g, c, s, indexing="ij")
    gg, cc, ss = gg.ravel(), cc.ravel(), ss.ravel()
    tt_ = np.minimum(tt_vec(gg, cc), cap)
    x = np.column_stack([gg, cc, ss * tt_])
    q = _forward(x)
    keep = np.all(np.isfinite(q), axis=1) & (q[:, 2] > 0.0)
    return x[keep], cKDTree(_features(q[keep]))


def _newton(x0: np.ndarray, q: np.ndarray, cfg: SolverConfig):
    """Damped Newton on exp_mid(x) = q, row by row; x stays inside D1."""
    x = x0.copy()
    scale = _scale(q)
    f = _forward(x) - q
    res = np.max(np.abs(f), axis=1) / scale
    stalled = np.zeros(len(x), dtype=bool)
    # polish past tol: short arcs resolve c only at third order in t
    goal = 1e-15
    for _ in range(cfg.max_iter):
        act = np.nonzero((res > goal) & ~stalled)[0]
        if act.size == 0:
            break
        xa, fa = x[act], f[act]
        h = 1e-5 * np.maximum(1.0, np.abs(xa))
        h[:, 2] = 1e-5 * xa[:, 2]
        jac = np.empty((act.size, 3, 3))
        for j in range(3):
            xp, xm = xa.copy(), xa.copy()
            xp[:, j] += h[:, j]
            xm[:, j] -= h[:, j]
            jac[:, :, j] = (_forward(xp) - _forward(xm)) / (2.0 * h[:, j:j + 1])
        try:
            step = -np.linalg.solve(jac, fa[:, :, None])[:, :, 0]
        except np.linalg.LinAlgError:
            step = -np.einsum("nij,nj->ni", np.linalg.pinv(jac), fa)
        step[~np.all(np.isfinite(step), axis=1)] = 0.0
        alpha = np.ones(act.size)
        pending = np.ones(act.size, dtype=bool)
        r0 = res[act]
        for _ in range(30):
            idx = np.nonzero(pending)[0]
            if idx.size == 0:
                break
            xn = xa[idx] + alpha[idx, None] * step[idx]
            ok = _in_d1(xn)
            fn = np.full((idx.size, 3), np.inf)
            if np.any(ok):
                fn[ok] = _forward(xn[ok]) - q[act[idx[ok]]]
            rn = np.max(np.abs(fn), axis=1) / scale[act[idx]]
            good = ok & (rn < (1.0 - 1e-4 * alpha[idx]) * r0[idx])
            sel = act[idx[good]]
            x[sel], f[sel], res[sel] = xn[good], fn[good], rn[good]
            pending[idx[good]] = False
            alpha[idx[~good]] *= 0.5
        stalled[act[pending]] = True
    return x, res


def _midpoints_interior(qp: np.ndarray, cfg: SolverConfig):
    """Midpoint coordinates in D1 for targets with z > 0 (rows of qp)."""
    n = len(qp)
    seeds, tree = _seed_table(cfg.seed_time_cap)
    n_near = max(cfg.n_starts, 1)
    _, nn = tree.query(_features(qp), k=n_near)
    nn = np.atleast_2d(nn).reshape(n, n_near)
    best_x = np.full((n, 3), np.nan)
    best_r = np.full(n, np.inf)
    todo = np.arange(n)
    for j in range(n_near):
        if todo.size == 0:
            break
        x, r = _newton(seeds[nn[todo, j]], qp[todo], cfg)
        better = r < best_r[todo]
        best_x[todo[better]], best_r[todo[better]] = x[better], r[better]
        todo = todo[best_r[todo] > cfg.tol]
    if todo.size:
        # wider net: every seed whose image is close in the feature metric
        _, wide = tree.query(_features(qp[todo]), k=8 * n_near)
        wide = np.atleast_2d(wide).reshape(todo.size, -1)
        for j in range(n_near, wide.shape[1]):
            if todo.size == 0:
                break
            x, r = _newton(seeds[wide[:, j]], qp[todo], cfg)
            better = r < best_r[todo]
            best_x[todo[better]], best_r[todo[better]] = x[better], r[better]
            keep = best_r[todo] > cfg.tol
            todo, wide = todo[keep], wide[keep]
    return best_x, best_r


def _reflect2_points(q: np.ndarray) -> np.ndarray:
    x, y, z = q[:, 0], q[:, 1], q[:, 2]
    ch, sh = np.cosh(z), np.sinh(z)
    return np.column_stack([x * ch - y * sh, -(x * sh - y * ch), -z])


def solve_interior_batch(points, cfg: SolverConfig = DEFAULT_CONFIG):
    """Vectorized inverse map off the plane.

    Returns ``(mid, residual, ok)`` where ``mid`` holds midpoint coordinates
    (gamma', c', t).  Rows with z < 0 come back with gamma' in (2pi, 4pi).
    """
    q = np.atleast_2d(np.asarray(points, dtype=float))
    if q.shape[1] != 3:
        raise DomainError("points must have three columns")
    if np.any(np.abs(q[:, 2]) <= cfg.plane_band):
        raise DomainError("solve_interior needs |z| above the plane band")
    neg = q[:, 2] < 0.0
    qp = np.where(neg[:, None], _reflect2_points(q), q)
    mid = np.full((len(q), 3), np.nan)
    res = np.full(len(q), np.inf)
    axis = (qp[:, 0] == 0.0) & (qp[:, 1] == 0.0)
    mid[axis] = np.column_stack([np.full(axis.sum(), math.pi), np.zeros(axis.sum()), qp[axis, 2]])
    res[axis] = 0.0
    rest = ~axis
    if np.any(rest):
        mid[rest], res[rest] = _midpoints_interior(qp[rest], cfg)
    # eps^2 reverses time and flips gamma; the midpoint covector is simply reflected
    mid[neg, 0] = 2.0 * TWO_PI - mid[neg, 0]
    return mid, res, res <= cfg.tol


def _spec_from_mid(g: float, c: float, t: float) -> GeodesicSpec:
    return GeodesicSpec(pendulum_flow(Covector(g, c), -0.5 * t), t)


def _residual(nu: GeodesicSpec, q: GroupPoint) -> float:
    p = exp(nu.lam, nu.t)
    return max(abs(p.x - q.x), abs(p.y - q.y), abs(p.z - q.z))


def solve_interior(q, cfg: SolverConfig = DEFAULT_CONFIG) -> GeodesicSpec:
    """The unique minimizer reaching a point off the plane."""
    q = _as_point(q)
    mid, res, ok = solve_interior_batch([tuple(q)], cfg)
    if not ok[0]:
        best = None
        if np.all(np.isfinite(mid[0])):
            best = _spec_from_mid(*mid[0])
        raise NumericFailure("inverse map did not converge", best=best,
                             residual=float(res[0]))
    return _spec_from_mid(*mid[0])


# Plane solver ------------------------------------------------------------------

def _bisect_k(fn, target: float) -> float:
    """Root in (0, 1) of the increasing function fn(k) - target."""
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if fn(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _c1_spec(phi: float, k: float) -> GeodesicSpec:
    return GeodesicSpec(from_elliptic(EllipticCoords(phi, k, _C1_POS)), 4.0 * complete_K(k))


def _c2_spec(psi: float, k: float) -> GeodesicSpec:
    return GeodesicSpec(from_elliptic(EllipticCoords(k * psi, k, _C2_POS)),
                        4.0 * k * complete_K(k))


def _chart_m3(x: float, y: float) -> GeodesicSpec:
    # x^2 - y^2 = 16 E^2 / (1 - k^2), increasing in k
    k = _bisect_k(lambda k: 16.0 * complete_E(k) ** 2 / ((1.0 - k) * (1.0 + k)),
                  (x - y) * (x + y))
    kp2 = (1.0 - k) * (1.0 + k)
    u = math.acos(min(1.0, max(0.0, -y * kp2 / (4.0 * k * complete_E(k)))))
    return _c1_spec(incomplete_F(u, k) - 2.0 * complete_K(k), k)


def _chart_m1(x: float, y: float) -> GeodesicSpec:
    # y^2 - x^2 = 16 a^2 / (1 - k^2), increasing in k
    k = _bisect_k(lambda k: 16.0 * a_fn(k) ** 2 / ((1.0 - k) * (1.0 + k)),
                  (y - x) * (y + x))
    kp2 = (1.0 - k) * (1.0 + k)
    u = math.acos(min(1.0, max(0.0, x * kp2 / (4.0 * k * a_fn(k)))))
    return _c2_spec(incomplete_F(u, k) - 2.0 * complete_K(k), k)


@lru_cache(maxsize=2)
def _m2_seeds():
    c = np.geomspace(1e-3, 400.0, 120)
    s = np.linspace(0.02, 0.98, 40)
    cc, ss = np.meshgrid(c, s, indexing="ij")
    cc, ss = cc.ravel(), ss.ravel()
    t = ss * np.minimum(tt_vec(np.zeros_like(cc), cc), 60.0)
    q = kernels.exp_mid_batch(np.zeros_like(cc), cc, t)
    x = np.column_stack([cc, t])
    keep = np.all(np.isfinite(q), axis=1)
    return x[keep], cKDTree(np.arcsinh(q[keep, :2]))


def _chart_m2(x: float, y: float, cfg: SolverConfig) -> GeodesicSpec:
    """Newton in (c*, t) for the midpoint covector (0, c*), c* > 0."""
    target = np.array([x, y])
    scale = max(1.0, abs(x), abs(y))
    seeds, tree = _m2_seeds()

    def fwd(v):
        p = kernels.exp_mid_point(0.0, v[0], v[1])
        return np.array(p[:2])

    def inside(v):
        return v[0] > 0.0 and 0.0 < v[1] < tt_vec(np.zeros(1), np.array([v[0]]))[0]

    _, nn = tree.query(np.arcsinh(target), k=cfg.n_starts)
    best, best_r = None, math.inf
    for j in np.atleast_1d(nn):
        v = seeds[j].copy()
        f = fwd(v) - target
        r = np.max(np.abs(f)) / scale
        for _ in range(cfg.max_iter):
            if r <= 1e-2 * cfg.tol:
                break
            h = 1e-7 * np.maximum(1.0, np.abs(v))
            jac = np.column_stack([(fwd(v + h[i] * np.eye(2)[i]) - target - f) / h[i]
                                   for i in range(2)])
            try:
                step = -np.linalg.solve(jac, f)
            except np.linalg.LinAlgError:
                break
            alpha = 1.0
            while alpha > 1e-9:
                vn = v + alpha * step
                if inside(vn):
                    fn = fwd(vn) - target
                    rn = np.max(np.abs(fn)) / scale
                    if rn < (1.0 - 1e-4 * alpha) * r:
                        v, f, r = vn, fn, rn
                        break
                alpha *= 0.5
            else:
                break
        if r < best_r:
            best, best_r = v, r
        if best_r <= cfg.tol:
            break
    if best is None or best_r > cfg.tol:
        raise NumericFailure("rest-region chart did not converge",
                             best=None if best is None else _spec_from_mid(0.0, *best),
                             residual=best_r)
    return _spec_from_mid(0.0, best[0], best[1])


def _solve_base(base: int, xq: float, yq: float, cfg: SolverConfig) -> GeodesicSpec:
    """The minimizer of the base stratum inside the quadrant."""
    if base == 1:
        return _chart_m3(xq, yq)
    if base == 9:
        return _chart_m1(xq, yq)
    if base == 35:
        return _chart_m2(xq, yq, cfg)
    if base == 17:
        k = invert_curve_k(5, xq)
        return _c1_spec(-complete_K(k), k)
    if base == 21:
        k = invert_curve_k(3, yq)
        return _c1_spec(-2.0 * complete_K(k), k)
    if base == 25:
        k = invert_curve_k(2, yq)
        return _c2_spec(-2.0 * complete_K(k), k)
    if base == 29:
        k = invert_curve_k(1, yq)
        return _c2_spec(-complete_K(k), k)
    if base == 33:
        return GeodesicSpec(Covector(0.0, 0.0), TWO_PI)
    if base == 39:
        return GeodesicSpec(Covector(0.0, 0.0), xq)
    raise DomainError(f"no chart for base stratum {base}")  # pragma: no cover


def solve_plane(q, cfg: SolverConfig = DEFAULT_CONFIG) -> list[GeodesicSpec]:
    """All minimizers reaching a point of the plane z = 0."""
    q = _as_point(q)
    if abs(q.z) > cfg.plane_band:
        raise DomainError("solve_plane needs |z| inside the plane band")
    if q.x == 0.0 and q.y == 0.0:
        raise OriginExcludedError("the origin is reached by the trivial geodesic only")
    return _solve_plane_labeled(q, cfg)[0]


def _solve_plane_labeled(q: GroupPoint, cfg: SolverConfig):
    label = classify_plane(q.x, q.y, cfg.curve_band)
    rep = label.rep
    nu = _solve_base(label.base, rep.xq, rep.yq, cfg)
    out = [reflect_n(INDEX_TABLE[j][1], nu) for j in label.indices]
    return out, label


def _bisect_k_vec(fn, target: np.ndarray) -> np.ndarray:
    lo = np.zeros_like(target)
    hi = np.ones_like(target)
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        below = fn(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def plane_minimizer_batch(x, y, band: float = 1e-7):
    """(gamma, c, t) of the lowest-index minimizer for many plane points.

    The two open Maxwell domains are inverted with a vectorized bisection in
    k; every other stratum goes through the scalar charts.
    """
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    idx = classify_plane_batch(x, y, band)
    if np.any(idx == 0):
        raise OriginExcludedError("the origin has no plane stratum")
    base = np.array([INDEX_TABLE[int(j)][0] for j in idx])
    refl = np.array([INDEX_TABLE[int(j)][1] for j in idx])
    xq, yq = np.abs(x), -np.abs(y)
    specs: list[GeodesicSpec | None] = [None] * len(x)
    for b in (1, 9):
        sel = np.nonzero(base == b)[0]
        if sel.size == 0:
            continue
        xs, ys = xq[sel], yq[sel]
        if b == 1:
            k = _bisect_k_vec(lambda k: 16.0 * complete_E_vec(k) ** 2 / ((1.0 - k) * (1.0 + k)),
                              (xs - ys) * (xs + ys))
            amp = complete_E_vec(k)
            cos_u = -ys * (1.0 - k) * (1.0 + k) / (4.0 * k * amp)
        else:
            k = _bisect_k_vec(lambda k: 16.0 * a_fn_vec(k) ** 2 / ((1.0 - k) * (1.0 + k)),
                              (ys - xs) * (ys + xs))
            amp = a_fn_vec(k)
            cos_u = xs * (1.0 - k) * (1.0 + k) / (4.0 * k * amp)
        u = np.arccos(np.clip(cos_u, 0.0, 1.0))
        big_k = complete_K_vec(k)
        for i, ki, ui, kk in zip(sel.tolist(), k.tolist(), u.tolist(), big_k.tolist()):
            arg = incomplete_F(ui, ki) - 2.0 * kk
            specs[i] = _c1_spec(arg, ki) if b == 1 else _c2_spec(arg, ki)
    cfg = SolverConfig(curve_band=band)
    out = np.empty((len(x), 3))
    for i in range(len(x)):
        nu = specs[i] or _solve_base(int(base[i]), float(xq[i]), float(yq[i]), cfg)
        nu = reflect_n(int(refl[i]), nu)
        out[i] = nu.lam.gamma, nu.lam.c, nu.t
    return out[:, 0], out[:, 1], out[:, 2]


# Public API --------------------------------------------------------------------

_FAMILY_TO_CLASS = {"Max": MAXWELL_PAIR, "ConjCut": CONJ_CUT_UNIQUE, "Rest": REST_UNIQUE}


def minimizers(q, cfg: SolverConfig = DEFAULT_CONFIG) -> SynthesisResult:
    q = _as_point(q)
    if q.x == 0.0 and q.y == 0.0 and q.z == 0.0:
        raise OriginExcludedError("the origin is the start point")
    if abs(q.z) > cfg.plane_band:
        nu = solve_interior(q, cfg)
        return SynthesisResult([nu], nu.t, INTERIOR_UNIQUE, _residual(nu, q))
    mins, label = _solve_plane_labeled(q, cfg)
    res = max(_residual(nu, q) for nu in mins)
    pairing = None
    if len(mins) == 2:
        pairing = INDEX_TABLE[label.indices[0]][1] ^ INDEX_TABLE[label.indices[1]][1]
    return SynthesisResult(mins, mins[0].t, _FAMILY_TO_CLASS[cut_family(label.stratum_index)],
                           res, label, pairing)


def distance(q, cfg: SolverConfig = DEFAULT_CONFIG) -> float:
    q = _as_point(q)
    if q == ORIGIN or (q.x == 0.0 and q.y == 0.0 and q.z == 0.0):
        return 0.0
    return minimizers(q, cfg).distance


def distance_batch(points, cfg: SolverConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Distances for many points; off-plane points share one vectorized solve."""
    q = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.empty(len(q))
    off = np.abs(q[:, 2]) > cfg.plane_band
    if np.any(off):
        mid, res, ok = solve_interior_batch(q[off], cfg)
        if not np.all(ok):
            raise NumericFailure("inverse map did not converge",
                                 residual=float(np.max(res)))
        out[off] = mid[:, 2]
    for i in np.nonzero(~off)[0]:
        out[i] = distance(tuple(q[i]), cfg)
    return out


def cut_time_ok(nu: GeodesicSpec, slack: float = 1e-9) -> bool:
    return nu.t <= tt(nu.lam) + slack
