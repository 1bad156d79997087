"""Self-check suites behind ``sh2synth verify``.

Each suite returns a list of ``Check`` records (property, worst error,
tolerance).  Sizes default to small sweeps so the command runs in seconds;
the acceptance tests drive the same properties at full size.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .elliptic import complete_E, complete_K
from .expmap import GeodesicSpec, GroupPoint, exp
from .pendulum import Covector, pendulum_flow
from .plane import INDEX_TABLE, classify_plane, indices_for, x2_of_y, x3_of_y
from .symmetry import reflect_m, reflect_n
from .synthesis import solve_interior_batch, tt_vec

SUITES = ("elliptic", "oracle", "symmetry", "roundtrip", "strata")


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    error: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.error <= self.tol)

    def as_dict(self) -> dict:
        return {**asdict(self), "passed": self.passed}


def elliptic_suite(n: int = 10_000, seed: int = 0) -> list[Check]:
    rng = np.random.default_rng(seed)
    u = rng.uniform(-50.0, 50.0, n)
    k = rng.uniform(0.0, 1.0, n)
    sn, cn, dn = kernels.jacobi_batch(u, k)
    ks = np.unique(np.round(k[: max(n // 100, 10)], 6))
    big_k = np.array([complete_K(v) for v in ks])
    big_e = np.array([complete_E(v) for v in ks])
    uu = rng.uniform(-10.0, 10.0, ks.size)
    quasi = np.abs(kernels.eps_batch(uu + 2.0 * big_k, ks) - kernels.eps_batch(uu, ks) - 2.0 * big_e)
    return [
        Check("elliptic", "sn^2 + cn^2 - 1", float(np.max(np.abs(sn * sn + cn * cn - 1.0))), 1e-12),
        Check("elliptic", "dn^2 + k^2 sn^2 - 1",
              float(np.max(np.abs(dn * dn + k * k * sn * sn - 1.0))), 1e-12),
        Check("elliptic", "eps(u + 2K) - eps(u) - 2E", float(np.max(quasi)), 1e-10),
    ]


def oracle_grid(n: int = 40, n_t: int = 8, t_cap: float = 20.0):
    """Covector grid times time samples on (0, min(tt, t_cap)]."""
    g = np.arange(n) * (4.0 * math.pi / n)
    c = np.linspace(-4.0, 4.0, n)
    gg, cc = np.meshgrid(g, c, indexing="ij")
    gg, cc = gg.ravel(), cc.ravel()
    top = np.minimum(tt_vec(gg, cc), t_cap)
    times = 0.1 + (top - 0.1)[:, None] * np.linspace(0.0, 1.0, n_t)[None, :]
    return gg, cc, times


def oracle_suite(n: int = 12, n_t: int = 4, steps: int = 20000) -> list[Check]:
    gg, cc, times = oracle_grid(n, n_t)
    ref = kernels.rk4_batch(gg, cc, times, steps)
    got = kernels.exp_batch(np.repeat(gg, times.shape[1]), np.repeat(cc, times.shape[1]),
                            times.ravel()).reshape(ref.shape)
    return [Check("oracle", "|exp - rk4|", float(np.max(np.abs(got - ref))), 1e-7)]


def _random_specs(n: int, rng, t_cap: float = 20.0):
    g = rng.uniform(0.0, 4.0 * math.pi, n)
    c = rng.uniform(-4.0, 4.0, n)
    top = np.minimum(tt_vec(g, c), t_cap)
    t = rng.uniform(0.0, 1.0, n) * top
    return g, c, t


def symmetry_suite(n: int = 200, seed: int = 1) -> list[Check]:
    rng = np.random.default_rng(seed)
    g, c, t = _random_specs(n, rng)
    worst = 0.0
    for gi, ci, ti in zip(g.tolist(), c.tolist(), t.tolist()):
        nu = GeodesicSpec(Covector(gi, ci), ti)
        q = exp(nu.lam, nu.t)
        for i in range(1, 8):
            a = reflect_m(i, q).as_array()
            nr = reflect_n(i, nu)
            b = exp(nr.lam, nr.t).as_array()
            worst = max(worst, float(np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(a)))))
    return [Check("symmetry", "exp o eps^i - eps^i o exp", worst, 1e-9)]


def roundtrip_suite(n: int = 500, seed: int = 2) -> list[Check]:
    rng = np.random.default_rng(seed)
    g, c, t = _random_specs(n, rng)
    q = kernels.exp_batch(g, c, t)
    off = np.abs(q[:, 2]) > 1e-8
    mid, _, ok = solve_interior_batch(q[off])
    lam = [pendulum_flow(Covector(a, b), -0.5 * s) for a, b, s in mid]
    dg = np.array([l.gamma for l in lam]) - g[off]
    dg = np.abs((dg + 2.0 * math.pi) % (4.0 * math.pi) - 2.0 * math.pi)
    dc = np.abs(np.array([l.c for l in lam]) - c[off])
    dt = np.abs(mid[:, 2] - t[off])
    return [
        Check("roundtrip", "non-convergences", float(np.sum(~ok)), 0.0),
        Check("roundtrip", "|solve(exp(nu)) - nu|", float(np.max(np.maximum.reduce([dg, dc, dt]))), 1e-6),
    ]


def strata_suite(n: int = 400) -> list[Check]:
    y = -np.geomspace(1e-3, 50.0, n)
    x2, x3 = np.asarray(x2_of_y(y)), np.asarray(x3_of_y(y))
    bound = max(
        float(np.max(np.maximum(0.0, (-y - 2.0) - x2))),
        float(np.max(np.maximum(0.0, x2 - (-y)))),
        float(np.max(np.maximum(0.0, np.maximum(2.0 * math.pi, 2.0 - y) - x3))),
        float(np.max(np.maximum(0.0, x2 - x3))),
    )
    strict = bool(np.all((-y - 2.0 < x2) & (x2 < -y) & (x3 > np.maximum(2 * math.pi, 2 - y)) & (x2 < x3)))
    mismatch = 0
    rng = np.random.default_rng(3)
    for xv, yv in rng.uniform(-20.0, 20.0, (200, 2)):
        lab = classify_plane(float(xv), float(yv))
        for i in range(1, 8):
            q = reflect_m(i, GroupPoint(float(xv), float(yv), 0.0))
            moved = classify_plane(q.x, q.y)
            # eps^i eps^r = eps^(i xor r)
            expected = indices_for(lab.base, INDEX_TABLE[lab.indices[0]][1] ^ i)
            if moved.indices != expected:
                mismatch += 1
    table_ok = sorted(INDEX_TABLE) == list(range(1, 41))
    return [
        Check("strata", "curve bounds violated", 0.0 if strict else max(bound, 1.0), 0.0),
        Check("strata", "reflected index differs from table", float(mismatch), 0.0),
        Check("strata", "index table incomplete", 0.0 if table_ok else 1.0, 0.0),
    ]


def run(suite: str = "all", **sizes) -> list[Check]:
    names = SUITES if suite == "all" else (suite,)
    out: list[Check] = []
    for name in names:
        fn = {"elliptic": elliptic_suite, "oracle": oracle_suite, "symmetry": symmetry_suite,
              "roundtrip": roundtrip_suite, "strata": strata_suite}.get(name)
        if fn is None:
            raise ValueError(f"unknown suite {name!r}")
        out.extend(fn(**sizes.get(name, {})))
    return out
