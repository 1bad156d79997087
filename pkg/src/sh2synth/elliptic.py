"""Complete and incomplete elliptic integrals and Jacobi functions.

Everything here works with a real modulus ``0 <= k <= 1`` (not the parameter
``m = k**2``).  Scalar routines use :mod:`math` only; the ``*_vec`` variants at
the bottom operate on numpy arrays and are used by the plane curve inversions.

Algorithms
----------
* ``K`` and ``E`` via the arithmetic-geometric mean (Gauss).
* ``am``, ``sn``, ``cn``, ``dn`` via descending Landen transformation, after
  reducing the argument into ``[-K, K]`` with the quasi-period ``2K``.
* incomplete ``F`` and ``E`` via Carlson's symmetric forms ``R_F`` and
  ``R_D``, after reducing the amplitude into ``[-pi/2, pi/2]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError, DomainError

_EPS = 2.0 ** -53
_RF_Q = (3.0 * _EPS) ** (-1.0 / 6.0)
_RD_Q = (0.25 * _EPS) ** (-1.0 / 6.0)


@dataclass(frozen=True)
class JacobiTriple:
    sn: float
    cn: float
    dn: float

    def __iter__(self):
        return iter((self.sn, self.cn, self.dn))


def check_modulus(k: float) -> float:
    k = float(k)
    if not (0.0 <= k <= 1.0):
        raise DomainError(f"modulus k={k!r} is outside [0, 1]")
    return k


def kprime2(k: float) -> float:
    """Complementary parameter ``1 - k**2`` without cancellation near k=1."""
    return (1.0 - k) * (1.0 + k)


def kprime(k: float) -> float:
    return math.sqrt(kprime2(k))


def agm(a: float, b: float) -> float:
    """Arithmetic-geometric mean of two non-negative numbers."""
    if a < 0.0 or b < 0.0:
        raise DomainError("agm needs non-negative arguments")
    if a == 0.0 or b == 0.0:
        return 0.0
    for _ in range(64):
        if abs(a - b) <= 4.0 * _EPS * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return 0.5 * (a + b)


def complete_K(k: float) -> float:
    k = check_modulus(k)
    if k == 1.0:
        raise DivergenceError("K(k) diverges at k = 1")
    return math.pi / (2.0 * agm(1.0, kprime(k)))


def complete_E(k: float) -> float:
    k = check_modulus(k)
    if k == 1.0:
        return 1.0
    a, b, c = 1.0, kprime(k), k
    weight = 0.5
    total = weight * c * c
    for _ in range(64):
        if c <= _EPS * a:
            break
        c = 0.5 * (a - b)
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        weight *= 2.0
        total += weight * c * c
    return math.pi / (2.0 * a) * (1.0 - total)


# Carlson symmetric integrals -------------------------------------------------

def carlson_rf(x: float, y: float, z: float) -> float:
    """R_F(x, y, z) for non-negative arguments, at most one of them zero."""
    if min(x, y, z) < 0.0 or (x == 0.0) + (y == 0.0) + (z == 0.0) > 1:
        raise DomainError("R_F needs non-negative arguments, at most one zero")
    x0, y0 = x, y
    a0 = (x + y + z) / 3.0
    q = _RF_Q * max(abs(a0 - x), abs(a0 - y), abs(a0 - z))
    a, scale = a0, 1.0
    while q * scale > abs(a):
        sx, sy, sz = math.sqrt(x), math.sqrt(y), math.sqrt(z)
        lam = sx * sy + sy * sz + sz * sx
        x, y, z = 0.25 * (x + lam), 0.25 * (y + lam), 0.25 * (z + lam)
        a = 0.25 * (a + lam)
        scale *= 0.25
    bx = (a0 - x0) * scale / a
    by = (a0 - y0) * scale / a
    bz = -(bx + by)
    e2 = bx * by - bz * bz
    e3 = bx * by * bz
    poly = 1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0
    return poly / math.sqrt(a)


def carlson_rd(x: float, y: float, z: float) -> float:
    """R_D(x, y, z) for x, y >= 0 (not both zero) and z > 0."""
    if min(x, y) < 0.0 or z <= 0.0 or (x == 0.0 and y == 0.0):
        raise DomainError("R_D needs x, y >= 0 (not both zero) and z > 0")
    x0, y0 = x, y
    a0 = (x + y + 3.0 * z) / 5.0
    q = _RD_Q * max(abs(a0 - x), abs(a0 - y), abs(a0 - z))
    a, scale, acc = a0, 1.0, 0.0
    while q * scale > abs(a):
        sx, sy, sz = math.sqrt(x), math.sqrt(y), math.sqrt(z)
        lam = sx * sy + sy * sz + sz * sx
        acc += scale / (sz * (z + lam))
        x, y, z = 0.25 * (x + lam), 0.25 * (y + lam), 0.25 * (z + lam)
        a = 0.25 * (a + lam)
        scale *= 0.25
    bx = (a0 - x0) * scale / a
    by = (a0 - y0) * scale / a
    bz = -(bx + by) / 3.0
    xy, zz = bx * by, bz * bz
    e2 = xy - 6.0 * zz
    e3 = (3.0 * xy - 8.0 * zz) * bz
    e4 = 3.0 * (xy - zz) * zz
    e5 = xy * zz * bz
    poly = (1.0 - 3.0 * e2 / 14.0 + e3 / 6.0 + 9.0 * e2 * e2 / 88.0
            - 3.0 * e4 / 22.0 - 9.0 * e2 * e3 / 52.0 + 3.0 * e5 / 26.0)
    return scale * poly / (a * math.sqrt(a)) + 3.0 * acc


# Incomplete integrals --------------------------------------------------------

def _reduce_amplitude(u: float) -> tuple[int, float]:
    m = round(u / math.pi)
    return m, u - m * math.pi


def incomplete_F(u: float, k: float) -> float:
    """F(u, k) = int_0^u dtheta / sqrt(1 - k^2 sin^2 theta) for real u."""
    k = check_modulus(k)
    m, r = _reduce_amplitude(u)
    if k == 1.0:
        if m != 0 or abs(r) >= 0.5 * math.pi:
            raise DivergenceError("F(u, 1) diverges for |u| >= pi/2")
        return math.atanh(math.sin(r))
    s, c = math.sin(r), math.cos(r)
    val = s * carlson_rf(c * c, c * c + kprime2(k) * s * s, 1.0)
    if m:
        val += 2.0 * m * complete_K(k)
    return val


def incomplete_E_amp(u: float, k: float) -> float:
    """E(u, k) = int_0^u sqrt(1 - k^2 sin^2 theta) dtheta for real u."""
    k = check_modulus(k)
    m, r = _reduce_amplitude(u)
    s, c = math.sin(r), math.cos(r)
    if k == 1.0:
        return 2.0 * m + s
    if s == 0.0:
        val = 0.0
    else:
        c2 = c * c
        d2 = c2 + kprime2(k) * s * s
        val = s * carlson_rf(c2, d2, 1.0) - (k * k / 3.0) * s ** 3 * carlson_rd(c2, d2, 1.0)
    if m:
        val += 2.0 * m * complete_E(k)
    return val


# Jacobi functions ------------------------------------------------------------

def _am_landen(u: float, k: float) -> float:
    a, b, c = 1.0, kprime(k), k
    ratios = []
    while c > _EPS * a and len(ratios) < 64:
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), 0.5 * (a - b)
        ratios.append(c / a)
    phi = math.ldexp(a * u, len(ratios))
    for ratio in reversed(ratios):
        phi = 0.5 * (phi + math.asin(ratio * math.sin(phi)))
    return phi


def jacobi_am(phi: float, k: float) -> float:
    """Jacobi amplitude; ``am(phi + 2K) = am(phi) + pi``."""
    k = check_modulus(k)
    if k == 0.0:
        return float(phi)
    if k == 1.0:
        return math.atan(math.sinh(phi))
    big_k = complete_K(k)
    m = round(phi / (2.0 * big_k))
    return _am_landen(phi - 2.0 * big_k * m, k) + m * math.pi


def jacobi_sncndn(phi: float, k: float) -> JacobiTriple:
    k = check_modulus(k)
    if k == 1.0:
        sech = 1.0 / math.cosh(phi)
        return JacobiTriple(math.tanh(phi), sech, sech)
    am = jacobi_am(phi, k)
    sn, cn = math.sin(am), math.cos(am)
    # dn from cn and sn avoids the 0/0 of the Landen cosine ratio.
    dn = math.sqrt(cn * cn + kprime2(k) * sn * sn)
    return JacobiTriple(sn, cn, dn)


def jacobi_eps(phi: float, k: float) -> float:
    """Jacobi epsilon ``E(am(phi, k), k)``; equals ``tanh`` at k = 1."""
    k = check_modulus(k)
    if k == 1.0:
        return math.tanh(phi)
    if k == 0.0:
        return float(phi)
    return incomplete_E_amp(jacobi_am(phi, k), k)


def a_fn(k: float) -> float:
    """a(k) = E(k) - (1 - k^2) K(k), evaluated without cancellation."""
    k = check_modulus(k)
    if k == 0.0:
        return 0.0
    if k == 1.0:
        return 1.0
    kp2 = kprime2(k)
    return k * k * kp2 / 3.0 * carlson_rd(0.0, 1.0, kp2)


# Vectorized helpers ----------------------------------------------------------

def complete_K_vec(k) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    a = np.ones_like(k)
    b = np.sqrt((1.0 - k) * (1.0 + k))
    for _ in range(40):
        a, b = 0.5 * (a + b), np.sqrt(a * b)
        if np.all(np.abs(a - b) <= 4.0 * _EPS * a):
            break
    with np.errstate(divide="ignore"):
        return np.where(k < 1.0, np.pi / (2.0 * a), np.inf)


def complete_E_vec(k) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    a = np.ones_like(k)
    b = np.sqrt((1.0 - k) * (1.0 + k))
    c = k.copy()
    weight = 0.5
    total = weight * c * c
    for _ in range(40):
        c = 0.5 * (a - b)
        a, b = 0.5 * (a + b), np.sqrt(a * b)
        weight *= 2.0
        total = total + weight * c * c
        if np.all(c <= _EPS * a):
            break
    return np.where(k < 1.0, np.pi / (2.0 * a) * (1.0 - total), 1.0)


def carlson_rd_vec(x, y, z) -> np.ndarray:
    x, y, z = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, z)))
    x, y, z = x.copy(), y.copy(), z.copy()
    x0, y0 = x.copy(), y.copy()
    a0 = (x + y + 3.0 * z) / 5.0
    q = _RD_Q * np.maximum(np.maximum(np.abs(a0 - x), np.abs(a0 - y)), np.abs(a0 - z))
    a = a0.copy()
    acc = np.zeros_like(a)
    scale = 1.0
    for _ in range(60):
        if np.all(q * scale <= np.abs(a)):
            break
        sx, sy, sz = np.sqrt(x), np.sqrt(y), np.sqrt(z)
        lam = sx * sy + sy * sz + sz * sx
        acc += scale / (sz * (z + lam))
        x, y, z = 0.25 * (x + lam), 0.25 * (y + lam), 0.25 * (z + lam)
        a = 0.25 * (a + lam)
        scale *= 0.25
    bx = (a0 - x0) * scale / a
    by = (a0 - y0) * scale / a
    bz = -(bx + by) / 3.0
    xy, zz = bx * by, bz * bz
    e2 = xy - 6.0 * zz
    e3 = (3.0 * xy - 8.0 * zz) * bz
    e4 = 3.0 * (xy - zz) * zz
    e5 = xy * zz * bz
    poly = (1.0 - 3.0 * e2 / 14.0 + e3 / 6.0 + 9.0 * e2 * e2 / 88.0
            - 3.0 * e4 / 22.0 - 9.0 * e2 * e3 / 52.0 + 3.0 * e5 / 26.0)
    return scale * poly / (a * np.sqrt(a)) + 3.0 * acc


def a_fn_vec(k) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    kp2 = (1.0 - k) * (1.0 + k)
    safe = np.where((k > 0.0) & (k < 1.0), kp2, 0.5)
    val = k * k * safe / 3.0 * carlson_rd_vec(0.0, 1.0, safe)
    return np.where(k <= 0.0, 0.0, np.where(k >= 1.0, 1.0, val))
