"""Closed-form exponential map, its companions and an RK4 reference.

Arclength-parametrized extremals start at the origin with initial covector
lambda = (gamma, c) and follow

    x' = cos(gamma/2) cosh z,   y' = cos(gamma/2) sinh z,   z' = sin(gamma/2)

while (gamma, c) moves along the pendulum.  On C1 and C2 the formulas are
written with ``A = dn - k cn`` and ``B = dn + k cn``; since ``A * B = 1 - k**2``
the smaller one is always obtained by division, which keeps the evaluation
accurate close to the separatrix.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .elliptic import jacobi_eps, jacobi_sncndn, kprime2
from .errors import DomainError, UnsupportedStratumError
from .pendulum import (
    SEPARATRIX_TOL,
    Covector,
    EllipticCoords,
    Stratum,
    classify,
    pendulum_flow,
    modulus,
    to_elliptic,
)


@dataclass(frozen=True)
class GroupPoint:
    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def __iter__(self):
        return iter((self.x, self.y, self.z))


ORIGIN = GroupPoint(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class GeodesicSpec:
    lam: Covector
    t: float

    def __post_init__(self):
        if not self.t >= 0.0:
            raise DomainError("geodesic time must be >= 0")


@dataclass(frozen=True)
class TauP:
    tau: float
    p: float


def _ab(sn: float, cn: float, dn: float, k: float, kp2: float) -> tuple[float, float]:
    """(dn - k cn, dn + k cn), the small factor recovered from A*B = k'^2."""
    if cn >= 0.0:
        b = dn + k * cn
        return kp2 / b, b
    a = dn - k * cn
    return a, kp2 / a


# Jacobi-argument increment below which differences are taken by the addition
# formulas around the midpoint; there 1 - k^2 sn^2 tau sn^2 p stays above 0.93.
SHORT_INCREMENT = 0.5


def _increments(u0: float, du: float, k: float, kp2: float):
    """(d_eps, d_sn, ln(A(u0+du)/A(u0)), A(u0), B(u0)) without cancellation."""
    sn0, cn0, dn0 = jacobi_sncndn(u0, k)
    a0, b0 = _ab(sn0, cn0, dn0, k, kp2)
    if du > SHORT_INCREMENT:
        snt, cnt, dnt = jacobi_sncndn(u0 + du, k)
        at, _ = _ab(snt, cnt, dnt, k, kp2)
        d_eps = jacobi_eps(u0 + du, k) - jacobi_eps(u0, k)
        return d_eps, snt - sn0, math.log(at / a0), a0, b0
    p = 0.5 * du
    sm, cm, dm = jacobi_sncndn(u0 + p, k)
    sp, cp, dp = jacobi_sncndn(p, k)
    k2 = k * k
    delta = 1.0 - k2 * sm * sm * sp * sp
    d_sn = 2.0 * sp * cm * dm / delta
    d_eps = 2.0 * jacobi_eps(p, k) - 2.0 * k2 * sm * sm * sp * cp * dp / delta
    # dn(u0+du) - k cn(u0+du) - A(u0) = 2 k sn_m sn_p (dn_m dn_p - k cn_m cn_p) / delta
    if cm * cp >= 0.0:
        inner = kp2 * delta / (dm * dp + k * cm * cp)
    else:
        inner = dm * dp - k * cm * cp
    ratio = 2.0 * k * sm * sp * inner / (delta * a0)
    if abs(ratio) < 0.5:
        log_ratio = math.log1p(ratio)
    else:
        snt, cnt, dnt = jacobi_sncndn(u0 + du, k)
        log_ratio = math.log(_ab(snt, cnt, dnt, k, kp2)[0] / a0)
    return d_eps, d_sn, log_ratio, a0, b0


def exp_c1(e: EllipticCoords, t: float) -> GroupPoint:
    if e.tag.stratum is not Stratum.C1:
        raise UnsupportedStratumError("exp_c1 needs a C1 covector")
    k, s1 = e.k, e.tag.s1
    d_eps, d_sn, log_ratio, a0, b0 = _increments(e.phi, t, k, kprime2(k))
    lo = (d_eps - k * d_sn) / a0
    hi = (d_eps + k * d_sn) / b0
    return GroupPoint(0.5 * s1 * (lo + hi), 0.5 * (lo - hi), s1 * log_ratio)


def exp_c2(e: EllipticCoords, t: float) -> GroupPoint:
    if e.tag.stratum is not Stratum.C2:
        raise UnsupportedStratumError("exp_c2 needs a C2 covector")
    k, s2 = e.k, e.tag.s2
    kp2 = kprime2(k)
    dpsi = t / k
    d_eps, d_sn, log_ratio, a0, b0 = _increments(e.phi / k, dpsi, k, kp2)
    d_eps -= kp2 * dpsi
    lo = (d_eps - k * d_sn) / a0
    hi = (d_eps + k * d_sn) / b0
    return GroupPoint(0.5 * (hi - lo), -0.5 * s2 * (lo + hi), s2 * log_ratio)


def exp_c3(e: EllipticCoords, t: float) -> GroupPoint:
    if e.tag.stratum is not Stratum.C3:
        raise UnsupportedStratumError("exp_c3 needs a C3 covector")
    s1, s2, phi = e.tag.s1, e.tag.s2, e.phi
    w = math.cosh(phi)
    if t > SHORT_INCREMENT:
        d_tanh = math.tanh(phi + t) - math.tanh(phi)
        # ln(cosh(phi + t) / cosh(phi)) written to avoid overflow for large |phi|
        log_ratio = _log_cosh(phi + t) - _log_cosh(phi)
    else:
        d_tanh = math.sinh(t) / (math.cosh(phi + t) * w)
        sh = math.sinh(0.5 * t)
        log_ratio = math.log1p(2.0 * sh * sh + math.tanh(phi) * math.sinh(t))
    return GroupPoint(
        0.5 * s1 * (t / w + w * d_tanh),
        0.5 * s2 * (t / w - w * d_tanh),
        s1 * s2 * log_ratio,
    )


def _log_cosh(v: float) -> float:
    a = abs(v)
    return a + math.log1p(math.exp(-2.0 * a)) - math.log(2.0)


def exp_c4(s1: int, t: float) -> GroupPoint:
    return GroupPoint(s1 * t, 0.0, 0.0)


def exp_c5(sgn_sin: int, t: float) -> GroupPoint:
    return GroupPoint(0.0, 0.0, sgn_sin * t)


def exp(lam: Covector, t: float, tol: float = SEPARATRIX_TOL) -> GroupPoint:
    """Endpoint of the arclength extremal with initial covector ``lam`` at time t."""
    if not t >= 0.0:
        raise DomainError("geodesic time must be >= 0")
    tag = classify(lam, tol)
    st = tag.stratum
    if st is Stratum.C4 or (st is Stratum.C1 and modulus(lam, tag) == 0.0):
        return exp_c4(tag.s1, t)
    if st is Stratum.C5:
        return exp_c5(tag.s2, t)
    e = to_elliptic(lam, tol)
    if st is Stratum.C1:
        return exp_c1(e, t)
    if st is Stratum.C2:
        return exp_c2(e, t)
    return exp_c3(e, t)


def exp_spec(nu: GeodesicSpec, tol: float = SEPARATRIX_TOL) -> GroupPoint:
    return exp(nu.lam, nu.t, tol)


def exp_mid(lam_mid: Covector, t: float, tol: float = SEPARATRIX_TOL) -> GroupPoint:
    """Exp parametrized by the covector at the middle of the arc."""
    return exp(pendulum_flow(lam_mid, -0.5 * t, tol), t, tol)


def r1r2(q: GroupPoint) -> tuple[float, float]:
    ch, sh = math.cosh(0.5 * q.z), math.sinh(0.5 * q.z)
    return q.y * ch - q.x * sh, q.x * ch - q.y * sh


def sinh_z(p: float, tau: float, k: float, s1: int) -> float:
    """sinh of the z coordinate on C1 in the (tau, p) chart."""
    snp = jacobi_sncndn(p, k).sn
    snt = jacobi_sncndn(tau, k).sn
    delta = 1.0 - k * k * snp * snp * snt * snt
    assert delta > 0.0
    return s1 * 2.0 * k * snp * snt / delta


def tau_p(e: EllipticCoords, t: float) -> TauP:
    st = e.tag.stratum
    if st in (Stratum.C1, Stratum.C3):
        return TauP(e.phi + 0.5 * t, 0.5 * t)
    if st is Stratum.C2:
        return TauP((e.phi + 0.5 * t) / e.k, 0.5 * t / e.k)
    raise UnsupportedStratumError(f"{st.value} has no (tau, p) chart")


def controls(lam_t: Covector) -> tuple[float, float]:
    half = 0.5 * lam_t.gamma
    return math.cos(half), math.sin(half)


def _rhs(state: np.ndarray) -> np.ndarray:
    g, c, _, _, z = state
    u1, u2 = math.cos(0.5 * g), math.sin(0.5 * g)
    return np.array([c, -math.sin(g), u1 * math.cosh(z), u1 * math.sinh(z), u2])


def ode_oracle(lam: Covector, t: float, steps: int = 20000) -> GroupPoint:
    """Fixed-step RK4 integration of the full Hamiltonian system from the origin."""
    if steps < 1:
        raise DomainError("steps must be >= 1")
    if not t >= 0.0:
        raise DomainError("geodesic time must be >= 0")
    h = t / steps
    state = np.array([lam.gamma, lam.c, 0.0, 0.0, 0.0])
    for _ in range(steps):
        k1 = _rhs(state)
        k2 = _rhs(state + 0.5 * h * k1)
        k3 = _rhs(state + 0.5 * h * k2)
        k4 = _rhs(state + h * k3)
        state = state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return GroupPoint(float(state[2]), float(state[3]), float(state[4]))
