"""The reflections eps^1..eps^7 and their actions on covectors, geodesics, points.

eps^1, eps^2, eps^5, eps^6 reverse time on the pendulum; they act on a
geodesic through its terminal covector.  Index 0 is accepted as the identity
so that reflection bookkeeping can treat "no reflection" uniformly.
"""
from __future__ import annotations

import math

from .errors import DomainError
from .expmap import GeodesicSpec, GroupPoint
from .pendulum import Covector, pendulum_flow

TWO_PI = 2.0 * math.pi
TIME_REVERSING = frozenset({1, 2, 5, 6})


def _check_index(i: int) -> None:
    if i not in range(0, 8):
        raise DomainError(f"reflection index {i!r} is not in 0..7")


def is_time_reversing(i: int) -> bool:
    _check_index(i)
    return i in TIME_REVERSING


def reflect_c(i: int, lam: Covector) -> Covector:
    _check_index(i)
    g, c = lam.gamma, lam.c
    if i == 0:
        return lam
    if i == 1:
        return Covector(g, -c)
    if i == 2:
        return Covector(-g, c)
    if i == 3:
        return Covector(-g, -c)
    if i == 4:
        return Covector(g + TWO_PI, c)
    if i == 5:
        return Covector(g + TWO_PI, -c)
    if i == 6:
        return Covector(TWO_PI - g, c)
    return Covector(TWO_PI - g, -c)


def reflect_n(i: int, nu: GeodesicSpec) -> GeodesicSpec:
    _check_index(i)
    if i in TIME_REVERSING:
        return GeodesicSpec(reflect_c(i, pendulum_flow(nu.lam, nu.t)), nu.t)
    return GeodesicSpec(reflect_c(i, nu.lam), nu.t)


def reflect_m(i: int, q: GroupPoint) -> GroupPoint:
    _check_index(i)
    x, y, z = q.x, q.y, q.z
    if i == 0:
        return q
    if i in (3, 4, 7):
        sx = -1.0 if i in (4, 7) else 1.0
        sy = -1.0 if i in (3, 7) else 1.0
        sz = -1.0 if i in (3, 4) else 1.0
        return GroupPoint(sx * x, sy * y, sz * z)
    ch, sh = math.cosh(z), math.sinh(z)
    u = x * ch - y * sh
    v = x * sh - y * ch
    if i == 1:
        return GroupPoint(u, v, z)
    if i == 2:
        return GroupPoint(u, -v, -z)
    if i == 5:
        return GroupPoint(-u, v, -z)
    return GroupPoint(-u, -v, z)


def plane_signs(i: int) -> tuple[int, int]:
    """Action of eps^i on the plane z = 0 as a pair of coordinate signs."""
    _check_index(i)
    sx = -1 if i in (4, 5, 6, 7) else 1
    sy = -1 if i in (1, 3, 5, 7) else 1
    return sx, sy
