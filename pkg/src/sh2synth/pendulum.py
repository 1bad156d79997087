"""Vertical subsystem: the pendulum  gamma' = c,  c' = -sin(gamma).

A covector is the pair (gamma, c) with gamma taken modulo 4*pi.  Its energy
E = c**2/2 - cos(gamma) decides the stratum:

    C1   -1 < E < 1          oscillation
    C2   E > 1               rotation
    C3   E = 1, c != 0       separatrix
    C4   E = -1              stable equilibria gamma in {0, 2pi}
    C5   E = 1, c = 0        unstable equilibria gamma in {pi, 3pi}

On C1, C2 and C3 the flow is a translation in an elliptic coordinate phi
(``phi -> phi + t``); the charts below realise that straightening.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .elliptic import (
    check_modulus,
    complete_K,
    incomplete_F,
    jacobi_sncndn,
)
from .errors import DomainError, UnsupportedStratumError

FOUR_PI = 4.0 * math.pi
SEPARATRIX_TOL = 1e-9


def wrap_angle(gamma: float) -> float:
    """Reduce an angle to [0, 4*pi)."""
    g = math.fmod(gamma, FOUR_PI)
    if g < 0.0:
        g += FOUR_PI
    if g >= FOUR_PI:  # fmod rounding on tiny negatives
        g = 0.0
    return g


def _sign(v: float) -> int:
    return 1 if v >= 0.0 else -1


@dataclass(frozen=True)
class Covector:
    gamma: float
    c: float

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and math.isfinite(self.c)):
            raise DomainError("covector components must be finite")
        object.__setattr__(self, "gamma", wrap_angle(float(self.gamma)))
        object.__setattr__(self, "c", float(self.c))

    @property
    def energy(self) -> float:
        return energy(self)


class Stratum(str, enum.Enum):
    C1 = "C1"
    C2 = "C2"
    C3 = "C3"
    C4 = "C4"
    C5 = "C5"


@dataclass(frozen=True)
class StratumTag:
    """Stratum plus the branch signs that are constant along each orbit.

    ``s1 = sgn cos(gamma/2)`` (C1, C3, C4) and ``s2 = sgn c`` (C2, C3).
    For C5, ``s2`` stores ``sgn sin(gamma/2)``.  Unused signs are 0.
    """

    stratum: Stratum
    s1: int = 0
    s2: int = 0

    @property
    def component(self) -> str:
        sup = {1: "0", -1: "1"}
        pm = {1: "+", -1: "-"}
        st = self.stratum
        if st in (Stratum.C1, Stratum.C4):
            return f"{st.value}^{sup[self.s1]}"
        if st is Stratum.C2:
            return f"C2^{pm[self.s2]}"
        if st is Stratum.C3:
            return f"C3^{sup[self.s1]}{pm[self.s2]}"
        return f"C5^{pm[self.s2]}"


@dataclass(frozen=True)
class EllipticCoords:
    """Straightening coordinates.  ``phi`` advances at unit speed.

    On C2 the Jacobi functions take ``psi = phi / k`` as their argument.
    """

    phi: float
    k: float
    tag: StratumTag

    @property
    def psi(self) -> float:
        if self.tag.stratum is not Stratum.C2:
            raise UnsupportedStratumError("psi is only defined on C2")
        return self.phi / self.k


def energy(lam: Covector) -> float:
    return 0.5 * lam.c * lam.c - math.cos(lam.gamma)


def _energy_offsets(lam: Covector) -> tuple[float, float]:
    """(E + 1, E - 1) in factored form, free of cancellation."""
    half = 0.5 * lam.gamma
    hc, s, co = 0.5 * abs(lam.c), math.sin(half), abs(math.cos(half))
    return 2.0 * (hc * hc + s * s), 2.0 * (hc - co) * (hc + co)


def classify(lam: Covector, tol: float = SEPARATRIX_TOL) -> StratumTag:
    e_plus, e_minus = _energy_offsets(lam)
    half = 0.5 * lam.gamma
    if abs(e_plus) <= tol and abs(lam.c) <= tol:
        return StratumTag(Stratum.C4, s1=_sign(math.cos(half)))
    if abs(e_minus) <= tol:
        if abs(lam.c) <= tol:
            return StratumTag(Stratum.C5, s2=_sign(math.sin(half)))
        return StratumTag(Stratum.C3, s1=_sign(math.cos(half)), s2=_sign(lam.c))
    if e_minus < 0.0:
        return StratumTag(Stratum.C1, s1=_sign(math.cos(half)))
    return StratumTag(Stratum.C2, s2=_sign(lam.c))


def modulus(lam: Covector, tag: StratumTag | None = None) -> float:
    """Elliptic modulus of the orbit through ``lam`` (0 on C4, 1 on C3/C5)."""
    tag = tag or classify(lam)
    # k**2 = (E + 1)/2 = c**2/4 + sin(gamma/2)**2 on C1, its inverse on C2.
    r = math.hypot(0.5 * lam.c, math.sin(0.5 * lam.gamma))
    below_one = math.nextafter(1.0, 0.0)
    if tag.stratum is Stratum.C1:
        return min(r, below_one)
    if tag.stratum is Stratum.C2:
        return min(1.0 / r, below_one)
    return 0.0 if tag.stratum is Stratum.C4 else 1.0


def to_elliptic(lam: Covector, tol: float = SEPARATRIX_TOL) -> EllipticCoords:
    tag = classify(lam, tol)
    half = 0.5 * lam.gamma
    st = tag.stratum
    if st is Stratum.C1:
        k = modulus(lam, tag)
        if k == 0.0:
            raise UnsupportedStratumError("covector sits at the C4 equilibrium")
        amp = math.atan2(tag.s1 * math.sin(half), 0.5 * lam.c)
        if amp < 0.0:
            amp += 2.0 * math.pi
        return EllipticCoords(incomplete_F(amp, k), k, tag)
    if st is Stratum.C2:
        k = modulus(lam, tag)
        amp = math.atan2(tag.s2 * math.sin(half), math.cos(half))
        if amp < 0.0:
            amp += 2.0 * math.pi
        return EllipticCoords(k * incomplete_F(amp, k), k, tag)
    if st is Stratum.C3:
        return EllipticCoords(math.asinh(tag.s2 * math.tan(half)), 1.0, tag)
    raise UnsupportedStratumError(f"{st.value} has no elliptic coordinates")


def from_elliptic(coords: EllipticCoords) -> Covector:
    tag, k = coords.tag, coords.k
    st = tag.stratum
    if st is Stratum.C1:
        check_modulus(k)
        sn, cn, dn = jacobi_sncndn(coords.phi, k)
        half = math.atan2(tag.s1 * k * sn, tag.s1 * dn)
        return Covector(2.0 * half, 2.0 * k * cn)
    if st is Stratum.C2:
        check_modulus(k)
        sn, cn, dn = jacobi_sncndn(coords.phi / k, k)
        half = math.atan2(tag.s2 * sn, cn)
        return Covector(2.0 * half, 2.0 * tag.s2 * dn / k)
    if st is Stratum.C3:
        th = math.tanh(coords.phi)
        sech = 1.0 / math.cosh(coords.phi)
        half = math.atan2(tag.s1 * tag.s2 * th, tag.s1 * sech)
        return Covector(2.0 * half, 2.0 * tag.s2 * sech)
    raise UnsupportedStratumError(f"{st.value} has no elliptic coordinates")


def pendulum_flow(lam: Covector, t: float, tol: float = SEPARATRIX_TOL) -> Covector:
    """Pendulum flow e^{t H_v}; equilibria are fixed."""
    tag = classify(lam, tol)
    if tag.stratum in (Stratum.C4, Stratum.C5):
        return lam
    if tag.stratum is Stratum.C1 and modulus(lam, tag) == 0.0:
        return lam
    coords = to_elliptic(lam, tol)
    return from_elliptic(EllipticCoords(coords.phi + t, coords.k, coords.tag))


def period(lam: Covector, tol: float = SEPARATRIX_TOL) -> float:
    """Period of the (gamma mod 4pi, c) motion; inf on the separatrix."""
    tag = classify(lam, tol)
    st = tag.stratum
    if st is Stratum.C1:
        k = modulus(lam, tag)
        return 2.0 * math.pi if k == 0.0 else 4.0 * complete_K(k)
    if st is Stratum.C2:
        k = modulus(lam, tag)
        return 4.0 * k * complete_K(k)
    if st is Stratum.C4:
        return 2.0 * math.pi
    return math.inf
