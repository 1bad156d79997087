"""Stratification of the plane z = 0 into the forty strata M'_1 .. M'_40.

Within the closed quadrant Q = {x >= 0, y <= 0} the plane splits into the
domains m1 (0 < x < x2(y)), m2 (x2(y) < x < x3(y)), m3 (x > x3(y)), the
curves gamma_1 .. gamma_5 and the point P = (2pi, 0).  Every other point is
carried into Q by one of the reflections, whose action on the plane only
flips coordinate signs.

The index bookkeeping is generated from four rules:

* j in {1, 9}:              eps^i M'_j = M'_{j+i},      i = 1..7
* j = 17:                   eps^2, eps^4, eps^6 give 18, 19, 20
* j in {21, 25, 29, 35}:    eps^{2+i} M'_j = M'_{j+i},  i = 1..3
* j in {33, 39}:            eps^4 M'_j = M'_{j+1}

Because eps^2 acts trivially on the plane, a point of a Maxwell stratum carries
two indices (e.g. 9 and 11); these index the two minimizers.

One exception: eps^6 fixes every geodesic over gamma_1, so eps^5 = eps^3 eps^6
would give M'_32 the same minimizer as M'_30.  M'_32 is generated by
eps^7 = eps^3 eps^4 instead, which pairs the two minimizers on the upper
half of the y-axis by eps^4 exactly as on the lower half.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .elliptic import a_fn_vec, complete_E_vec
from .errors import DomainError, OriginExcludedError
from .symmetry import plane_signs

TWO_PI = 2.0 * math.pi
PLANE_BAND = 1e-9


def _build_index_table() -> dict[int, tuple[int, int]]:
    table = {j: (j, 0) for j in (1, 9, 17, 21, 25, 29, 33, 35, 39)}
    for j in (1, 9):
        for i in range(1, 8):
            table[j + i] = (j, i)
    for i in (1, 2, 3):
        table[17 + i] = (17, 2 * i)
    for j in (21, 25, 29, 35):
        for i in (1, 2, 3):
            table[j + i] = (j, 2 + i)
    for j in (33, 39):
        table[j + 1] = (j, 4)
    table[32] = (29, 7)
    assert sorted(table) == list(range(1, 41))
    return table


#: index -> (base index in Q, reflection carrying the base stratum onto it)
INDEX_TABLE = _build_index_table()

MAX_INDICES = frozenset(range(1, 21)) | frozenset(range(29, 33))
CONJCUT_INDICES = frozenset(range(21, 29)) | {33, 34}
REST_INDICES = frozenset(range(35, 41))

# bases lying on an axis, where one coordinate sign carries no information
_ON_X_AXIS = frozenset({17, 33, 39})
_ON_Y_AXIS = frozenset({29})


def family_of(index: int) -> str:
    """Fine family label: Max, CurveMax, CurveConjCut, PointConjCut or Rest."""
    if index not in INDEX_TABLE:
        raise DomainError(f"no plane stratum {index!r}")
    if index <= 16:
        return "Max"
    if index <= 20 or 29 <= index <= 32:
        return "CurveMax"
    if index <= 28:
        return "CurveConjCut"
    if index <= 34:
        return "PointConjCut"
    return "Rest"


def cut_family(index: int) -> str:
    """Coarse family: Max, ConjCut or Rest."""
    if index in MAX_INDICES:
        return "Max"
    if index in CONJCUT_INDICES:
        return "ConjCut"
    if index in REST_INDICES:
        return "Rest"
    raise DomainError(f"no plane stratum {index!r}")


# Curves ----------------------------------------------------------------------

def _curve_xy(which: int, k):
    k = np.asarray(k, dtype=float)
    kp2 = (1.0 - k) * (1.0 + k)
    if which == 1:
        return np.zeros_like(k), -4.0 * a_fn_vec(k) / np.sqrt(kp2)
    if which == 2:
        a = a_fn_vec(k)
        return 4.0 * k * a / kp2, -4.0 * a / kp2
    if which == 3:
        e = complete_E_vec(k)
        return 4.0 * e / kp2, -4.0 * k * e / kp2
    if which == 5:
        return 4.0 * complete_E_vec(k) / np.sqrt(kp2), np.zeros_like(k)
    raise DomainError(f"curve gamma_{which} has no modulus parametrization")


def gamma_curves(which: int, param: float) -> tuple[float, float]:
    """Point of gamma_which: param is k in (0, 1), or t in (0, 2pi) for gamma_4."""
    if which == 4:
        if not 0.0 < param < TWO_PI:
            raise DomainError("gamma_4 needs t in (0, 2pi)")
        return float(param), 0.0
    if which not in (1, 2, 3, 5):
        raise DomainError(f"no curve gamma_{which}")
    if not 0.0 < param < 1.0:
        raise DomainError("curve modulus must lie in (0, 1)")
    x, y = _curve_xy(which, param)
    return float(x), float(y)


def _invert_vec(which: int, coord) -> np.ndarray:
    """Bisection in k for the monotone coordinate of gamma_which."""
    coord = np.asarray(coord, dtype=float)
    use_x = which == 5
    lo = np.zeros_like(coord)
    hi = np.ones_like(coord)
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        x, y = _curve_xy(which, mid)
        val = x if use_x else y
        # x5 increases with k, the y-coordinates decrease
        go_right = (val < coord) if use_x else (val > coord)
        lo = np.where(go_right, mid, lo)
        hi = np.where(go_right, hi, mid)
        if np.all(hi - lo <= 2.0 ** -60):
            break
    return 0.5 * (lo + hi)


def invert_curve_k(which: int, coord: float) -> float:
    """The modulus k at which gamma_which reaches the given coordinate.

    gamma_1, gamma_2, gamma_3 are inverted through y < 0 and gamma_5 through
    x > 2pi.
    """
    if which in (1, 2, 3):
        if not (coord < 0.0 and math.isfinite(coord)):
            raise DomainError(f"gamma_{which} needs y < 0")
    elif which == 5:
        if not (coord > TWO_PI and math.isfinite(coord)):
            raise DomainError("gamma_5 needs x > 2pi")
    else:
        raise DomainError(f"gamma_{which} cannot be inverted by k")
    return float(_invert_vec(which, coord))


def x2_of_y(y):
    """x-coordinate of gamma_2 at height y < 0 (scalar or array)."""
    y_arr = np.asarray(y, dtype=float)
    if np.any(~(y_arr < 0.0)):
        raise DomainError("x2 is defined for y < 0")
    x, _ = _curve_xy(2, _invert_vec(2, y_arr))
    return float(x) if np.ndim(y) == 0 else x


def x3_of_y(y):
    y_arr = np.asarray(y, dtype=float)
    if np.any(~(y_arr < 0.0)):
        raise DomainError("x3 is defined for y < 0")
    x, _ = _curve_xy(3, _invert_vec(3, y_arr))
    return float(x) if np.ndim(y) == 0 else x


# Quadrant reduction and classification ---------------------------------------

@dataclass(frozen=True)
class QuadrantRep:
    xq: float
    yq: float
    reflection_index: int

    def restore(self) -> tuple[float, float]:
        sx, sy = plane_signs(self.reflection_index)
        return sx * self.xq, sy * self.yq


_SIGNS_TO_REFLECTION = {(1, 1): 0, (1, -1): 1, (-1, 1): 4, (-1, -1): 5}


def quadrant_reduce(x: float, y: float) -> QuadrantRep:
    if x == 0.0 and y == 0.0:
        raise OriginExcludedError("the origin has no plane stratum")
    sx = -1 if x < 0.0 else 1
    sy = -1 if y > 0.0 else 1
    return QuadrantRep(abs(x), -abs(y), _SIGNS_TO_REFLECTION[(sx, sy)])


@dataclass(frozen=True)
class PlaneLabel:
    stratum_index: int
    indices: tuple[int, ...]
    family: str
    base: int
    rep: QuadrantRep

    @property
    def cut_family(self) -> str:
        return cut_family(self.stratum_index)


def _base_in_q(xq: float, yq: float, band: float) -> int:
    if abs(yq) <= band:
        if abs(xq - TWO_PI) <= band:
            return 33
        return 39 if xq < TWO_PI else 17
    if xq <= band:
        return 29
    x2 = x2_of_y(yq)
    if abs(xq - x2) <= band:
        return 25
    if xq < x2:
        return 9
    x3 = x3_of_y(yq)
    if abs(xq - x3) <= band:
        return 21
    return 35 if xq < x3 else 1


def indices_for(base: int, reflection_index: int) -> tuple[int, ...]:
    """All stratum indices over ``base`` whose plane action matches the reduction."""
    sx, sy = plane_signs(reflection_index)
    out = []
    for idx, (b, i) in INDEX_TABLE.items():
        if b != base:
            continue
        ix, iy = plane_signs(i)
        if (base in _ON_Y_AXIS or ix == sx) and (base in _ON_X_AXIS or iy == sy):
            out.append(idx)
    return tuple(sorted(out))


def classify_plane(x: float, y: float, band: float = PLANE_BAND) -> PlaneLabel:
    rep = quadrant_reduce(x, y)
    base = _base_in_q(rep.xq, rep.yq, band)
    idx = indices_for(base, rep.reflection_index)
    return PlaneLabel(idx[0], idx, family_of(idx[0]), base, rep)


def classify_plane_batch(x, y, band: float = PLANE_BAND) -> np.ndarray:
    """Vectorized smallest stratum index (0 marks the origin)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xq, yq = np.abs(x), -np.abs(y)
    base = np.zeros(x.shape, dtype=int)
    on_x = np.abs(yq) <= band
    base[on_x] = np.where(np.abs(xq[on_x] - TWO_PI) <= band, 33,
                          np.where(xq[on_x] < TWO_PI, 39, 17))
    on_y = ~on_x & (xq <= band)
    base[on_y] = 29
    rest = ~on_x & ~on_y
    if np.any(rest):
        yr, xr = yq[rest], xq[rest]
        x2 = np.asarray(x2_of_y(yr))
        x3 = np.asarray(x3_of_y(yr))
        b = np.where(np.abs(xr - x2) <= band, 25,
                     np.where(xr < x2, 9,
                              np.where(np.abs(xr - x3) <= band, 21,
                                       np.where(xr < x3, 35, 1))))
        base[rest] = b
    out = np.zeros(x.shape, dtype=int)
    origin = (x == 0.0) & (y == 0.0)
    sxs = np.where(x < 0.0, -1, 1)
    sys_ = np.where(y > 0.0, -1, 1)
    for (sx, sy), r in _SIGNS_TO_REFLECTION.items():
        sel = (sxs == sx) & (sys_ == sy) & ~origin
        for b in np.unique(base[sel]):
            out[sel & (base == b)] = indices_for(int(b), r)[0]
    return out
