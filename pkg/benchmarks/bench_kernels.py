"""Compiled vs pure-Python kernels: timings and agreement.

Run after ``pip install -e . --no-build-isolation``:

    python benchmarks/bench_kernels.py [--n 2000] [--repeat 3]
"""
from __future__ import annotations

import argparse
import math
import time

import numpy as np

from sh2synth import _pykernels as py

try:
    from sh2synth import _ckernels as cy
except ImportError:  # pragma: no cover
    cy = None


def _best(fn, repeat):
    best, out = math.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000, help="covectors per kernel call")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if cy is None:
        print("compiled extension not built; nothing to compare")
        return 1
    rng = np.random.default_rng(args.seed)
    n = args.n
    g = rng.uniform(0.0, 4.0 * math.pi, n)
    c = rng.uniform(-4.0, 4.0, n)
    t = rng.uniform(0.0, 8.0, n)
    u = rng.uniform(-20.0, 20.0, n)
    k = rng.uniform(0.0, 1.0, n)
    n_conj = max(n // 20, 10)
    n_rk = max(n // 20, 10)
    times = np.sort(rng.uniform(0.1, 5.0, (n_rk, 4)), axis=1)
    cases = [
        ("exp_batch", n, lambda m: m.exp_batch(g, c, t)),
        ("exp_mid_batch", n, lambda m: m.exp_mid_batch(g, c, t)),
        ("jacobi_batch", n, lambda m: np.stack(m.jacobi_batch(u, k))),
        ("eps_batch", n, lambda m: m.eps_batch(u, k)),
        ("conj_time_batch", n_conj, lambda m: m.conj_time_batch(g[:n_conj], c[:n_conj])),
        ("rk4_batch(2000 steps)", n_rk, lambda m: m.rk4_batch(g[:n_rk], c[:n_rk], times, 2000)),
    ]
    print(f"{'kernel':<24}{'n':>7}{'cython s':>12}{'python s':>12}{'speedup':>10}{'max |diff|':>14}")
    for name, size, fn in cases:
        tc, oc = _best(lambda: fn(cy), args.repeat)
        tp, op = _best(lambda: fn(py), 1)
        diff = float(np.nanmax(np.abs(np.asarray(oc) - np.asarray(op))))
        print(f"{name:<24}{size:>7}{tc:>12.4f}{tp:>12.4f}{tp / tc:>10.1f}{diff:>14.3e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
