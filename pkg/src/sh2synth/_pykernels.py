"""Pure-Python implementations of the compiled kernels.

Same signatures and results as ``_ckernels``; used when the extension is
unavailable or when ``SH2SYNTH_PURE=1`` is set.  The RK4 integrator is
vectorized over covectors with numpy; the rest loops over scalar reference
routines.
"""
from __future__ import annotations

import math

import numpy as np

from . import elliptic as el
from .errors import NumericFailure
from .expmap import GeodesicSpec, exp, exp_mid
from .optimality import conj_time_numeric, jacobian_det
from .pendulum import Covector


def exp_point(g, c, t, tol=1e-9):
    return tuple(exp(Covector(g, c), t, tol))


def exp_mid_point(g, c, t, tol=1e-9):
    return tuple(exp_mid(Covector(g, c), t, tol))


def _triples(g, c, t):
    g = np.asarray(g, dtype=float).ravel()
    c = np.asarray(c, dtype=float).ravel()
    t = np.asarray(t, dtype=float).ravel()
    return zip(g.tolist(), c.tolist(), t.tolist()), g.size


def exp_batch(g, c, t, tol=1e-9):
    it, n = _triples(g, c, t)
    out = np.empty((n, 3))
    for i, (gi, ci, ti) in enumerate(it):
        out[i] = exp_point(gi, ci, ti, tol)
    return out


def exp_mid_batch(g, c, t, tol=1e-9):
    it, n = _triples(g, c, t)
    out = np.empty((n, 3))
    for i, (gi, ci, ti) in enumerate(it):
        out[i] = exp_mid_point(gi, ci, ti, tol)
    return out


def jacobi_batch(u, k):
    ub, kb = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(k, dtype=float))
    flat = [el.jacobi_sncndn(ui, ki) for ui, ki in zip(ub.ravel().tolist(), kb.ravel().tolist())]
    arr = np.array([tuple(f) for f in flat], dtype=float).reshape(ub.shape + (3,))
    return arr[..., 0], arr[..., 1], arr[..., 2]


def eps_batch(u, k):
    ub, kb = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(k, dtype=float))
    vals = [el.jacobi_eps(ui, ki) for ui, ki in zip(ub.ravel().tolist(), kb.ravel().tolist())]
    return np.array(vals, dtype=float).reshape(ub.shape)


def jacobian_det_point(g, c, t, tol=1e-9, h=0.0):
    return jacobian_det(GeodesicSpec(Covector(g, c), t), h if h > 0.0 else None, tol)


def conj_time_batch(g, c, tol=1e-9, n_scan=64):
    g = np.asarray(g, dtype=float).ravel()
    c = np.asarray(c, dtype=float).ravel()
    out = np.empty(g.size)
    for i, (gi, ci) in enumerate(zip(g.tolist(), c.tolist())):
        try:
            out[i] = conj_time_numeric(Covector(gi, ci), tol, n_scan)
        except NumericFailure:
            out[i] = math.nan
    return out


def p11_root_point(k):
    from .optimality import p11_root
    return p11_root(k)


def _rhs(s):
    u1 = np.cos(0.5 * s[0])
    return np.stack([s[1], -np.sin(s[0]), u1 * np.cosh(s[4]), u1 * np.sinh(s[4]),
                     np.sin(0.5 * s[0])])


def rk4_batch(g, c, times, steps=20000):
    g = np.asarray(g, dtype=float).ravel()
    c = np.asarray(c, dtype=float).ravel()
    times = np.asarray(times, dtype=float)
    if times.ndim != 2 or times.shape[0] != g.size:
        raise ValueError("times must have shape (n_covectors, n_times)")
    if np.any(np.diff(times, axis=1) < 0.0) or np.any(times < 0.0):
        raise ValueError("each row of times must be non-negative and ascending")
    n, m = times.shape
    out = np.empty((n, m, 3))
    state = np.zeros((5, n))
    state[0], state[1] = g, c
    hmax = times[:, -1] / steps
    tcur = np.zeros(n)
    for j in range(m):
        seg = times[:, j] - tcur
        # per-row substep counts, as in the compiled kernel; finished rows idle with h = 0
        with np.errstate(divide="ignore", invalid="ignore"):
            nsub = np.where(seg > 0.0, np.maximum(np.ceil(seg / hmax - 1e-9), 1.0), 0.0)
            h_row = np.where(nsub > 0.0, seg / nsub, 0.0)
        for q in range(int(nsub.max(initial=0.0))):
            h = np.where(q < nsub, h_row, 0.0)
            k1 = _rhs(state)
            k2 = _rhs(state + 0.5 * h * k1)
            k3 = _rhs(state + 0.5 * h * k2)
            k4 = _rhs(state + h * k3)
            state = state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        tcur = times[:, j].copy()
        out[:, j, :] = state[2:].T
    return out
