"""Maxwell, conjugate and cut times, and the optimality domains D1, D2.

Infinite times are represented by ``math.inf``.  The function ``tt`` (the cut
time) depends on the covector only through its energy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .elliptic import check_modulus, complete_K, jacobi_eps, jacobi_sncndn
from .errors import DomainError, NumericFailure
from .expmap import GeodesicSpec, exp
from .pendulum import (
    SEPARATRIX_TOL,
    Covector,
    EllipticCoords,
    Stratum,
    classify,
    from_elliptic,
    modulus,
    pendulum_flow,
    to_elliptic,
)

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class OptimalityBounds:
    t_max1: float
    t_conj_lo: float
    t_conj_hi: float
    t_cut: float


def t1_max(lam: Covector, tol: float = SEPARATRIX_TOL) -> float:
    """First Maxwell time."""
    tag = classify(lam, tol)
    if tag.stratum is Stratum.C1:
        k = modulus(lam, tag)
        return 4.0 * complete_K(k) if k > 0.0 else TWO_PI
    if tag.stratum is Stratum.C2:
        k = modulus(lam, tag)
        return 4.0 * k * complete_K(k)
    return math.inf


def _open_modulus(k: float) -> float:
    k = check_modulus(k)
    if k == 0.0 or k == 1.0:
        raise DomainError("modulus must lie strictly between 0 and 1")
    return k


def f1(p: float, k: float) -> float:
    k = _open_modulus(k)
    sn, cn, dn = jacobi_sncndn(p, k)
    return cn * jacobi_eps(p, k) - sn * dn


def f2(p: float, k: float) -> float:
    k = _open_modulus(k)
    sn, cn, dn = jacobi_sncndn(p, k)
    return dn * jacobi_eps(p, k) - k * k * sn * cn


def _bisect(fn, lo: float, hi: float, xtol: float = 1e-13, max_iter: int = 200) -> float:
    flo = fn(lo)
    fhi = fn(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0.0) == (fhi > 0.0):
        raise NumericFailure("no sign change in bracket", bracket=(lo, hi))
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= xtol * max(1.0, abs(mid)) or mid in (lo, hi):
            break
        fm = fn(mid)
        if fm == 0.0:
            return mid
        if (fm > 0.0) == (flo > 0.0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


@lru_cache(maxsize=4096)
def p11_root(k: float) -> float:
    """First positive root of f1; it lies in (2K, 3K)."""
    k = _open_modulus(k)
    big_k = complete_K(k)
    try:
        return _bisect(lambda p: f1(p, k), 2.0 * big_k, 3.0 * big_k, xtol=1e-15)
    except NumericFailure as exc:  # pragma: no cover - excluded by theory
        raise NumericFailure(f"f1 has no root in (2K, 3K) for k={k!r}",
                             bracket=exc.bracket) from exc


def t1_conj_bounds(lam: Covector, tol: float = SEPARATRIX_TOL) -> tuple[float, float]:
    tag = classify(lam, tol)
    st = tag.stratum
    if st is Stratum.C1:
        k = modulus(lam, tag)
        if k == 0.0:
            return TWO_PI, TWO_PI
        return 4.0 * complete_K(k), 2.0 * p11_root(k)
    if st is Stratum.C2:
        k = modulus(lam, tag)
        return 4.0 * k * complete_K(k), 2.0 * k * p11_root(k)
    if st is Stratum.C4:
        return TWO_PI, TWO_PI
    return math.inf, math.inf


def tt(lam: Covector, tol: float = SEPARATRIX_TOL) -> float:
    """The cut-time function: 4K, 4kK, 2pi or inf depending on the stratum."""
    tag = classify(lam, tol)
    if tag.stratum is Stratum.C4:
        return TWO_PI
    return t1_max(lam, tol)


def tt_of_energy(e: float) -> float:
    """tt as a function of the energy alone (E >= -1)."""
    if e < -1.0:
        raise DomainError("pendulum energy is at least -1")
    if e == -1.0:
        return TWO_PI
    if e == 1.0:
        return math.inf
    if e < 1.0:
        return 4.0 * complete_K(math.sqrt(0.5 * (e + 1.0)))
    k = math.sqrt(2.0 / (e + 1.0))
    return 4.0 * k * complete_K(k)


cut_time = tt


def bounds(lam: Covector, tol: float = SEPARATRIX_TOL) -> OptimalityBounds:
    lo, hi = t1_conj_bounds(lam, tol)
    return OptimalityBounds(t1_max(lam, tol), lo, hi, tt(lam, tol))


# Jacobian of Exp and the first conjugate time --------------------------------

def _chart(lam: Covector, tol: float):
    """A local chart (u, v) -> covector around ``lam`` plus its base point."""
    tag = classify(lam, tol)
    if tag.stratum in (Stratum.C1, Stratum.C2) and 0.0 < modulus(lam, tag) < 1.0:
        e = to_elliptic(lam, tol)

        def build(phi, k, _tag=e.tag):
            return from_elliptic(EllipticCoords(phi, k, _tag))

        return build, (e.phi, e.k), (0.0, 1.0), tol
    # Perturbations of an equilibrium are smaller than the separatrix band,
    # so the Cartesian chart classifies without tolerance.
    return (lambda g, c: Covector(g, c)), (lam.gamma, lam.c), None, 0.0


def jacobian_det(nu: GeodesicSpec, h: float | None = None,
                 tol: float = SEPARATRIX_TOL) -> float:
    """Central-difference determinant of D Exp in a local (u, v, t) chart.

    The chart is (phi, k, t) on C1 and C2 and (gamma, c, t) elsewhere.
    """
    build, (u0, v0), k_range, chart_tol = _chart(nu.lam, tol)
    t0 = nu.t
    hu = h if h is not None else 1e-5 * max(1.0, abs(u0))
    hv = h if h is not None else 1e-5 * max(1.0, abs(v0))
    ht = h if h is not None else 1e-5 * max(1.0, t0)
    if k_range is not None:
        # keep k +- hv inside (0, 1)
        room = min(v0 - k_range[0], k_range[1] - v0)
        hv = min(hv, 0.5 * room)
    ht = min(ht, 0.5 * t0) if t0 > 0.0 else ht

    def q(u, v, t):
        return np.array(tuple(exp(build(u, v), t, chart_tol)))

    cols = [
        (q(u0 + hu, v0, t0) - q(u0 - hu, v0, t0)) / (2.0 * hu),
        (q(u0, v0 + hv, t0) - q(u0, v0 - hv, t0)) / (2.0 * hv),
        (q(u0, v0, t0 + ht) - q(u0, v0, max(t0 - ht, 0.0))) / (t0 + ht - max(t0 - ht, 0.0)),
    ]
    return float(np.linalg.det(np.column_stack(cols)))


def conj_time_numeric(lam: Covector, tol: float = SEPARATRIX_TOL,
                      n_scan: int = 64) -> float:
    """First conjugate time, located inside the known bracket.

    Returns the lower end of the bracket when the Jacobian already vanishes
    there (a conjugate point coinciding with the Maxwell time).
    """
    tag = classify(lam, tol)
    st = tag.stratum
    if st is Stratum.C4 or (st is Stratum.C1 and modulus(lam, tag) == 0.0):
        return TWO_PI
    if st not in (Stratum.C1, Stratum.C2):
        return math.inf
    lo, hi = t1_conj_bounds(lam, tol)

    def det(t):
        return jacobian_det(GeodesicSpec(lam, t), tol=tol)

    ts = np.linspace(lo, hi, n_scan + 1)
    vals = np.array([det(t) for t in ts])
    scale = float(np.max(np.abs(vals)))
    if scale == 0.0 or abs(vals[0]) <= 1e-9 * scale:
        return float(lo)
    signs = np.sign(vals)
    change = np.nonzero(signs[1:] != signs[0])[0]
    if change.size == 0:
        raise NumericFailure("Jacobian keeps its sign over the conjugate bracket",
                             bracket=(lo, hi))
    j = int(change[0])
    return _bisect(det, float(ts[j]), float(ts[j + 1]))


# Domains ---------------------------------------------------------------------

def _mid_sin(nu: GeodesicSpec, tol: float) -> float:
    mid = pendulum_flow(nu.lam, 0.5 * nu.t, tol)
    return math.sin(0.5 * mid.gamma)


def in_ntilde(nu: GeodesicSpec, tol: float = SEPARATRIX_TOL) -> bool:
    tag = classify(nu.lam, tol)
    if tag.stratum is Stratum.C5:
        return True
    return nu.t < tt(nu.lam, tol) and _mid_sin(nu, tol) != 0.0


def in_d1(nu: GeodesicSpec, tol: float = SEPARATRIX_TOL) -> bool:
    return nu.t < tt(nu.lam, tol) and _mid_sin(nu, tol) > 0.0


def in_d2(nu: GeodesicSpec, tol: float = SEPARATRIX_TOL) -> bool:
    return nu.t < tt(nu.lam, tol) and _mid_sin(nu, tol) < 0.0
