# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: Jacobi functions, the exponential map, its Jacobian,
first conjugate times and a batched RK4 reference integrator.

The algorithms mirror the pure-Python modules one to one; see
``_pykernels`` for the fallback used when this extension is not built.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport (M_PI, asin, asinh, atan2, ceil, cos, cosh, exp, fabs, floor,
                        fmod, hypot, log, log1p, nextafter, sin, sinh, sqrt, tan, tanh)

cnp.import_array()

cdef double EPS = 1.1102230246251565e-16
cdef double TWO_PI = 2.0 * M_PI
cdef double FOUR_PI = 4.0 * M_PI
cdef double RF_Q = 1.0 / (3.0 * EPS) ** (1.0 / 6.0)
cdef double RD_Q = 1.0 / (0.25 * EPS) ** (1.0 / 6.0)

cdef enum:
    S_C1 = 1
    S_C2 = 2
    S_C3 = 3
    S_C4 = 4
    S_C5 = 5


cdef inline double kp2_(double k) nogil:
    return (1.0 - k) * (1.0 + k)


cdef inline double sgn(double v) nogil:
    return 1.0 if v >= 0.0 else -1.0


cdef inline double wrap4pi(double g) nogil:
    cdef double r = fmod(g, FOUR_PI)
    if r < 0.0:
        r += FOUR_PI
    if r >= FOUR_PI:
        r = 0.0
    return r


cdef double ellK(double k) nogil:
    cdef double a = 1.0, b = sqrt(kp2_(k)), an
    cdef int i
    for i in range(64):
        if fabs(a - b) <= 4.0 * EPS * a:
            break
        an = 0.5 * (a + b)
        b = sqrt(a * b)
        a = an
    return M_PI / (a + b)


cdef double ellE(double k) nogil:
    if k == 1.0:
        return 1.0
    cdef double a = 1.0, b = sqrt(kp2_(k)), c = k, an
    cdef double weight = 0.5, total = 0.5 * k * k
    cdef int i
    for i in range(64):
        if c <= EPS * a:
            break
        c = 0.5 * (a - b)
        an = 0.5 * (a + b)
        b = sqrt(a * b)
        a = an
        weight *= 2.0
        total += weight * c * c
    return M_PI / (2.0 * a) * (1.0 - total)


cdef double rf(double x, double y, double z) nogil:
    cdef double x0 = x, y0 = y
    cdef double a0 = (x + y + z) / 3.0
    cdef double q = RF_Q * max(fabs(a0 - x), max(fabs(a0 - y), fabs(a0 - z)))
    cdef double a = a0, scale = 1.0, sx, sy, sz, lam, bx, by, bz, e2, e3
    while q * scale > fabs(a):
        sx = sqrt(x)
        sy = sqrt(y)
        sz = sqrt(z)
        lam = sx * sy + sy * sz + sz * sx
        x = 0.25 * (x + lam)
        y = 0.25 * (y + lam)
        z = 0.25 * (z + lam)
        a = 0.25 * (a + lam)
        scale *= 0.25
    bx = (a0 - x0) * scale / a
    by = (a0 - y0) * scale / a
    bz = -(bx + by)
    e2 = bx * by - bz * bz
    e3 = bx * by * bz
    return (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0) / sqrt(a)


cdef double rd(double x, double y, double z) nogil:
    cdef double x0 = x, y0 = y
    cdef double a0 = (x + y + 3.0 * z) / 5.0
    cdef double q = RD_Q * max(fabs(a0 - x), max(fabs(a0 - y), fabs(a0 - z)))
    cdef double a = a0, scale = 1.0, acc = 0.0, sx, sy, sz, lam
    cdef double bx, by, bz, xy, zz, e2, e3, e4, e5, poly
    while q * scale > fabs(a):
        sx = sqrt(x)
        sy = sqrt(y)
        sz = sqrt(z)
        lam = sx * sy + sy * sz + sz * sx
        acc += scale / (sz * (z + lam))
        x = 0.25 * (x + lam)
        y = 0.25 * (y + lam)
        z = 0.25 * (z + lam)
        a = 0.25 * (a + lam)
        scale *= 0.25
    bx = (a0 - x0) * scale / a
    by = (a0 - y0) * scale / a
    bz = -(bx + by) / 3.0
    xy = bx * by
    zz = bz * bz
    e2 = xy - 6.0 * zz
    e3 = (3.0 * xy - 8.0 * zz) * bz
    e4 = 3.0 * (xy - zz) * zz
    e5 = xy * zz * bz
    poly = (1.0 - 3.0 * e2 / 14.0 + e3 / 6.0 + 9.0 * e2 * e2 / 88.0
            - 3.0 * e4 / 22.0 - 9.0 * e2 * e3 / 52.0 + 3.0 * e5 / 26.0)
    return scale * poly / (a * sqrt(a)) + 3.0 * acc


cdef inline double round_half(double v) nogil:
    # Python's round() uses banker's rounding; ties never matter here, but we
    # follow it so both backends reduce arguments identically.
    cdef double f = floor(v)
    cdef double d = v - f
    if d > 0.5:
        return f + 1.0
    if d < 0.5:
        return f
    return f if fmod(f, 2.0) == 0.0 else f + 1.0


cdef double incF(double u, double k, double K) nogil:
    cdef double m = round_half(u / M_PI)
    cdef double r = u - m * M_PI
    cdef double s = sin(r), c = cos(r)
    cdef double val = s * rf(c * c, c * c + kp2_(k) * s * s, 1.0)
    if m != 0.0:
        val += 2.0 * m * K
    return val


cdef double incE(double u, double k, double E) nogil:
    cdef double m = round_half(u / M_PI)
    cdef double r = u - m * M_PI
    cdef double s = sin(r), c = cos(r), c2, d2, val
    if s == 0.0:
        val = 0.0
    else:
        c2 = c * c
        d2 = c2 + kp2_(k) * s * s
        val = s * rf(c2, d2, 1.0) - (k * k / 3.0) * s * s * s * rd(c2, d2, 1.0)
    if m != 0.0:
        val += 2.0 * m * E
    return val


cdef double am_landen(double u, double k) nogil:
    cdef double ratios[64]
    cdef double a = 1.0, b = sqrt(kp2_(k)), c = k, an, phi
    cdef int n = 0, i
    while c > EPS * a and n < 64:
        an = 0.5 * (a + b)
        c = 0.5 * (a - b)
        b = sqrt(a * b)
        a = an
        ratios[n] = c / a
        n += 1
    phi = a * u
    for i in range(n):
        phi *= 2.0
    for i in range(n - 1, -1, -1):
        phi = 0.5 * (phi + asin(ratios[i] * sin(phi)))
    return phi


cdef double jam(double phi, double k, double K) nogil:
    if k == 0.0:
        return phi
    cdef double m = round_half(phi / (2.0 * K))
    return am_landen(phi - 2.0 * K * m, k) + m * M_PI


cdef void sncndn(double phi, double k, double K, double* sn, double* cn, double* dn) nogil:
    cdef double am = jam(phi, k, K)
    sn[0] = sin(am)
    cn[0] = cos(am)
    dn[0] = sqrt(cn[0] * cn[0] + kp2_(k) * sn[0] * sn[0])


cdef double jeps(double phi, double k, double K, double E) nogil:
    if k == 0.0:
        return phi
    return incE(jam(phi, k, K), k, E)


# Exponential map ------------------------------------------------------------

cdef struct Chart:
    int stratum
    double phi      # C1, C3: phi ; C2: psi
    double k
    double s1
    double s2
    double K
    double E


cdef inline void ab(double cn, double dn, double k, double kp2, double* a, double* b) nogil:
    if cn >= 0.0:
        b[0] = dn + k * cn
        a[0] = kp2 / b[0]
    else:
        a[0] = dn - k * cn
        b[0] = kp2 / a[0]


cdef inline double log_cosh(double v) nogil:
    cdef double a = fabs(v)
    return a + log1p(exp(-2.0 * a)) - 0.6931471805599453


cdef int classify_c(double g, double c, double tol, Chart* ch) nogil:
    """Fill stratum, signs and (for C1/C2/C3) the elliptic coordinate."""
    cdef double half = 0.5 * g
    cdef double s = sin(half), co = cos(half), hc = 0.5 * fabs(c)
    cdef double e_plus = 2.0 * (hc * hc + s * s)
    cdef double e_minus = 2.0 * (hc - fabs(co)) * (hc + fabs(co))
    cdef double k, amp, below = nextafter(1.0, 0.0)
    ch.s1 = sgn(co)
    ch.s2 = sgn(c)
    if fabs(e_plus) <= tol and fabs(c) <= tol:
        ch.stratum = S_C4
        return 0
    if fabs(e_minus) <= tol:
        if fabs(c) <= tol:
            ch.stratum = S_C5
            ch.s2 = sgn(s)
            return 0
        ch.stratum = S_C3
        ch.k = 1.0
        ch.phi = asinh(ch.s2 * tan(half))
        return 0
    if e_minus < 0.0:
        k = min(hypot(0.5 * c, s), below)
        if k == 0.0:
            ch.stratum = S_C4
            return 0
        ch.stratum = S_C1
        ch.k = k
        ch.K = ellK(k)
        ch.E = ellE(k)
        amp = atan2(ch.s1 * s, 0.5 * c)
        if amp < 0.0:
            amp += TWO_PI
        ch.phi = incF(amp, k, ch.K)
        return 0
    k = min(1.0 / hypot(0.5 * c, s), below)
    ch.stratum = S_C2
    ch.k = k
    ch.K = ellK(k)
    ch.E = ellE(k)
    amp = atan2(ch.s2 * s, co)
    if amp < 0.0:
        amp += TWO_PI
    ch.phi = incF(amp, k, ch.K)   # psi
    return 0


cdef double SHORT_INCREMENT = 0.5


cdef void increments(double u0, double du, double k, double kp2, double K, double E,
                     double* d_eps, double* d_sn, double* log_ratio,
                     double* a0, double* b0) nogil:
    """Differences over [u0, u0 + du]; short steps use midpoint addition formulas."""
    cdef double sn0, cn0, dn0, snt, cnt, dnt, at, bt
    cdef double p, sm, cm, dm, sp, cp, dp, k2, delta, inner, ratio
    sncndn(u0, k, K, &sn0, &cn0, &dn0)
    ab(cn0, dn0, k, kp2, a0, b0)
    if du > SHORT_INCREMENT:
        sncndn(u0 + du, k, K, &snt, &cnt, &dnt)
        ab(cnt, dnt, k, kp2, &at, &bt)
        d_eps[0] = jeps(u0 + du, k, K, E) - jeps(u0, k, K, E)
        d_sn[0] = snt - sn0
        log_ratio[0] = log(at / a0[0])
        return
    p = 0.5 * du
    sncndn(u0 + p, k, K, &sm, &cm, &dm)
    sncndn(p, k, K, &sp, &cp, &dp)
    k2 = k * k
    delta = 1.0 - k2 * sm * sm * sp * sp
    d_sn[0] = 2.0 * sp * cm * dm / delta
    d_eps[0] = 2.0 * jeps(p, k, K, E) - 2.0 * k2 * sm * sm * sp * cp * dp / delta
    if cm * cp >= 0.0:
        inner = kp2 * delta / (dm * dp + k * cm * cp)
    else:
        inner = dm * dp - k * cm * cp
    ratio = 2.0 * k * sm * sp * inner / (delta * a0[0])
    if fabs(ratio) < 0.5:
        log_ratio[0] = log1p(ratio)
    else:
        sncndn(u0 + du, k, K, &snt, &cnt, &dnt)
        ab(cnt, dnt, k, kp2, &at, &bt)
        log_ratio[0] = log(at / a0[0])


cdef void exp_chart(Chart* ch, double t, double* out) nogil:
    """Exp from a chart whose ``phi`` is the start coordinate (psi on C2)."""
    cdef double k = ch.k, kp2, a0, b0, d_eps, d_sn, log_ratio, lo, hi, dpsi, w, d_tanh, sh
    cdef int st = ch.stratum
    if st == S_C4:
        out[0] = ch.s1 * t
        out[1] = 0.0
        out[2] = 0.0
        return
    if st == S_C5:
        out[0] = 0.0
        out[1] = 0.0
        out[2] = ch.s2 * t
        return
    if st == S_C3:
        w = cosh(ch.phi)
        if t > SHORT_INCREMENT:
            d_tanh = tanh(ch.phi + t) - tanh(ch.phi)
            log_ratio = log_cosh(ch.phi + t) - log_cosh(ch.phi)
        else:
            d_tanh = sinh(t) / (cosh(ch.phi + t) * w)
            sh = sinh(0.5 * t)
            log_ratio = log1p(2.0 * sh * sh + tanh(ch.phi) * sinh(t))
        out[0] = 0.5 * ch.s1 * (t / w + w * d_tanh)
        out[1] = 0.5 * ch.s2 * (t / w - w * d_tanh)
        out[2] = ch.s1 * ch.s2 * log_ratio
        return
    kp2 = kp2_(k)
    if st == S_C1:
        dpsi = t
    else:
        dpsi = t / k
    increments(ch.phi, dpsi, k, kp2, ch.K, ch.E, &d_eps, &d_sn, &log_ratio, &a0, &b0)
    if st == S_C1:
        lo = (d_eps - k * d_sn) / a0
        hi = (d_eps + k * d_sn) / b0
        out[0] = 0.5 * ch.s1 * (lo + hi)
        out[1] = 0.5 * (lo - hi)
        out[2] = ch.s1 * log_ratio
    else:
        d_eps -= kp2 * dpsi
        lo = (d_eps - k * d_sn) / a0
        hi = (d_eps + k * d_sn) / b0
        out[0] = 0.5 * (hi - lo)
        out[1] = -0.5 * ch.s2 * (lo + hi)
        out[2] = ch.s2 * log_ratio


cdef inline void shift_chart(Chart* ch, double dt) nogil:
    if ch.stratum == S_C1 or ch.stratum == S_C3:
        ch.phi += dt
    elif ch.stratum == S_C2:
        ch.phi += dt / ch.k


cdef void exp_c(double g, double c, double t, double tol, double* out) nogil:
    cdef Chart ch
    classify_c(wrap4pi(g), c, tol, &ch)
    exp_chart(&ch, t, out)


cdef void exp_mid_c(double g, double c, double t, double tol, double* out) nogil:
    cdef Chart ch
    classify_c(wrap4pi(g), c, tol, &ch)
    shift_chart(&ch, -0.5 * t)
    exp_chart(&ch, t, out)


def exp_point(double g, double c, double t, double tol=1e-9):
    cdef double out[3]
    exp_c(g, c, t, tol, out)
    return out[0], out[1], out[2]


def exp_mid_point(double g, double c, double t, double tol=1e-9):
    cdef double out[3]
    exp_mid_c(g, c, t, tol, out)
    return out[0], out[1], out[2]


def exp_batch(g, c, t, double tol=1e-9):
    cdef double[::1] gv = np.ascontiguousarray(g, dtype=np.float64).ravel()
    cdef double[::1] cv = np.ascontiguousarray(c, dtype=np.float64).ravel()
    cdef double[::1] tv = np.ascontiguousarray(t, dtype=np.float64).ravel()
    cdef Py_ssize_t n = gv.shape[0], i
    res = np.empty((n, 3))
    cdef double[:, ::1] rv = res
    with nogil:
        for i in range(n):
            exp_c(gv[i], cv[i], tv[i], tol, &rv[i, 0])
    return res


def exp_mid_batch(g, c, t, double tol=1e-9):
    cdef double[::1] gv = np.ascontiguousarray(g, dtype=np.float64).ravel()
    cdef double[::1] cv = np.ascontiguousarray(c, dtype=np.float64).ravel()
    cdef double[::1] tv = np.ascontiguousarray(t, dtype=np.float64).ravel()
    cdef Py_ssize_t n = gv.shape[0], i
    res = np.empty((n, 3))
    cdef double[:, ::1] rv = res
    with nogil:
        for i in range(n):
            exp_mid_c(gv[i], cv[i], tv[i], tol, &rv[i, 0])
    return res


def jacobi_batch(u, k):
    """sn, cn, dn for broadcast arrays u, k with 0 <= k < 1."""
    ub, kb = np.broadcast_arrays(np.asarray(u, dtype=np.float64), np.asarray(k, dtype=np.float64))
    cdef double[::1] uv = np.ascontiguousarray(ub).ravel()
    cdef double[::1] kv = np.ascontiguousarray(kb).ravel()
    cdef Py_ssize_t n = uv.shape[0], i
    sn = np.empty(n)
    cn = np.empty(n)
    dn = np.empty(n)
    cdef double[::1] snv = sn, cnv = cn, dnv = dn
    with nogil:
        for i in range(n):
            sncndn(uv[i], kv[i], ellK(kv[i]), &snv[i], &cnv[i], &dnv[i])
    shape = ub.shape
    return sn.reshape(shape), cn.reshape(shape), dn.reshape(shape)


def eps_batch(u, k):
    ub, kb = np.broadcast_arrays(np.asarray(u, dtype=np.float64), np.asarray(k, dtype=np.float64))
    cdef double[::1] uv = np.ascontiguousarray(ub).ravel()
    cdef double[::1] kv = np.ascontiguousarray(kb).ravel()
    cdef Py_ssize_t n = uv.shape[0], i
    res = np.empty(n)
    cdef double[::1] rv = res
    with nogil:
        for i in range(n):
            rv[i] = jeps(uv[i], kv[i], ellK(kv[i]), ellE(kv[i]))
    return res.reshape(ub.shape)


# Jacobian determinant and conjugate time ------------------------------------

cdef void chart_eval(Chart* base, int cartesian, double u, double v, double t,
                     double* out) nogil:
    cdef Chart ch
    if cartesian:
        classify_c(wrap4pi(u), v, 0.0, &ch)
    else:
        ch = base[0]
        ch.k = v
        ch.K = ellK(v)
        ch.E = ellE(v)
        if ch.stratum == S_C2:
            ch.phi = u / v
        else:
            ch.phi = u
    exp_chart(&ch, t, out)


cdef double det3(double* a, double* b, double* c) nogil:
    return (a[0] * (b[1] * c[2] - b[2] * c[1])
            - b[0] * (a[1] * c[2] - a[2] * c[1])
            + c[0] * (a[1] * b[2] - a[2] * b[1]))


cdef double jacdet_c(double g, double c, double t, double tol, double h) nogil:
    cdef Chart ch
    cdef int cartesian
    cdef double u0, v0, hu, hv, ht, tlo, thi, room
    cdef double p[3]
    cdef double m[3]
    cdef double cu[3]
    cdef double cv[3]
    cdef double ct[3]
    cdef int i
    classify_c(wrap4pi(g), c, tol, &ch)
    if ch.stratum == S_C1 or ch.stratum == S_C2:
        cartesian = 0
        u0 = ch.phi * ch.k if ch.stratum == S_C2 else ch.phi
        v0 = ch.k
    else:
        cartesian = 1
        u0 = wrap4pi(g)
        v0 = c
    if h > 0.0:
        hu = h
        hv = h
        ht = h
    else:
        hu = 1e-5 * max(1.0, fabs(u0))
        hv = 1e-5 * max(1.0, fabs(v0))
        ht = 1e-5 * max(1.0, t)
    if not cartesian:
        room = min(v0, 1.0 - v0)
        hv = min(hv, 0.5 * room)
    if t > 0.0:
        ht = min(ht, 0.5 * t)
    chart_eval(&ch, cartesian, u0 + hu, v0, t, p)
    chart_eval(&ch, cartesian, u0 - hu, v0, t, m)
    for i in range(3):
        cu[i] = (p[i] - m[i]) / (2.0 * hu)
    chart_eval(&ch, cartesian, u0, v0 + hv, t, p)
    chart_eval(&ch, cartesian, u0, v0 - hv, t, m)
    for i in range(3):
        cv[i] = (p[i] - m[i]) / (2.0 * hv)
    tlo = max(t - ht, 0.0)
    thi = t + ht
    chart_eval(&ch, cartesian, u0, v0, thi, p)
    chart_eval(&ch, cartesian, u0, v0, tlo, m)
    for i in range(3):
        ct[i] = (p[i] - m[i]) / (thi - tlo)
    return det3(cu, cv, ct)


def jacobian_det_point(double g, double c, double t, double tol=1e-9, double h=0.0):
    return jacdet_c(g, c, t, tol, h)


cdef double f1_c(double p, double k, double K, double E) nogil:
    cdef double sn, cn, dn
    sncndn(p, k, K, &sn, &cn, &dn)
    return cn * jeps(p, k, K, E) - sn * dn


cdef double p11_c(double k) nogil:
    cdef double K = ellK(k), E = ellE(k)
    cdef double lo = 2.0 * K, hi = 3.0 * K, mid, flo, fm
    cdef int i
    flo = f1_c(lo, k, K, E)
    for i in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= 1e-15 * max(1.0, fabs(mid)) or mid == lo or mid == hi:
            break
        fm = f1_c(mid, k, K, E)
        if fm == 0.0:
            return mid
        if (fm > 0.0) == (flo > 0.0):
            lo = mid
            flo = fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


cdef double conj_c(double g, double c, double tol, int n_scan) nogil:
    """First conjugate time; NaN when no sign change is found."""
    cdef Chart ch
    cdef double lo, hi, t, v0, v, scale = 0.0, a, b, fa, fm, mid, tprev
    cdef int j, i
    classify_c(wrap4pi(g), c, tol, &ch)
    if ch.stratum == S_C4:
        return TWO_PI
    if ch.stratum == S_C3 or ch.stratum == S_C5:
        return 1.0 / 0.0
    if ch.stratum == S_C1:
        lo = 4.0 * ch.K
        hi = 2.0 * p11_c(ch.k)
    else:
        lo = 4.0 * ch.k * ch.K
        hi = 2.0 * ch.k * p11_c(ch.k)
    v0 = jacdet_c(g, c, lo, tol, 0.0)
    scale = fabs(v0)
    tprev = lo
    a = -1.0
    for j in range(1, n_scan + 1):
        t = lo + (hi - lo) * j / n_scan
        v = jacdet_c(g, c, t, tol, 0.0)
        scale = max(scale, fabs(v))
        if a < 0.0 and (v > 0.0) != (v0 > 0.0) and v != 0.0:
            a = tprev
            b = t
        tprev = t
    if scale == 0.0 or fabs(v0) <= 1e-9 * scale:
        return lo
    if a < 0.0:
        return 0.0 / 0.0
    fa = jacdet_c(g, c, a, tol, 0.0)
    for i in range(200):
        mid = 0.5 * (a + b)
        if b - a <= 1e-13 * max(1.0, fabs(mid)) or mid == a or mid == b:
            break
        fm = jacdet_c(g, c, mid, tol, 0.0)
        if fm == 0.0:
            return mid
        if (fm > 0.0) == (fa > 0.0):
            a = mid
            fa = fm
        else:
            b = mid
    return 0.5 * (a + b)


def conj_time_batch(g, c, double tol=1e-9, int n_scan=64):
    cdef double[::1] gv = np.ascontiguousarray(g, dtype=np.float64).ravel()
    cdef double[::1] cv = np.ascontiguousarray(c, dtype=np.float64).ravel()
    cdef Py_ssize_t n = gv.shape[0], i
    res = np.empty(n)
    cdef double[::1] rv = res
    with nogil:
        for i in range(n):
            rv[i] = conj_c(gv[i], cv[i], tol, n_scan)
    return res


def p11_root_point(double k):
    return p11_c(k)


# RK4 reference --------------------------------------------------------------

cdef inline void rhs(double* s, double* d) nogil:
    cdef double u1 = cos(0.5 * s[0]), u2 = sin(0.5 * s[0])
    d[0] = s[1]
    d[1] = -sin(s[0])
    d[2] = u1 * cosh(s[4])
    d[3] = u1 * sinh(s[4])
    d[4] = u2


cdef void rk4_step(double* s, double h) nogil:
    cdef double k1[5]
    cdef double k2[5]
    cdef double k3[5]
    cdef double k4[5]
    cdef double tmp[5]
    cdef int i
    rhs(s, k1)
    for i in range(5):
        tmp[i] = s[i] + 0.5 * h * k1[i]
    rhs(tmp, k2)
    for i in range(5):
        tmp[i] = s[i] + 0.5 * h * k2[i]
    rhs(tmp, k3)
    for i in range(5):
        tmp[i] = s[i] + h * k3[i]
    rhs(tmp, k4)
    for i in range(5):
        s[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])


def rk4_batch(g, c, times, int steps=20000):
    """Integrate each covector once, sampling at its (ascending) row of times.

    The step never exceeds max(times[i]) / steps; each segment between two
    sample times is split evenly so the samples are hit exactly.
    """
    cdef double[::1] gv = np.ascontiguousarray(g, dtype=np.float64).ravel()
    cdef double[::1] cv = np.ascontiguousarray(c, dtype=np.float64).ravel()
    tarr = np.ascontiguousarray(times, dtype=np.float64)
    if tarr.ndim != 2 or tarr.shape[0] != gv.shape[0]:
        raise ValueError("times must have shape (n_covectors, n_times)")
    if np.any(np.diff(tarr, axis=1) < 0.0) or np.any(tarr < 0.0):
        raise ValueError("each row of times must be non-negative and ascending")
    cdef double[:, ::1] tv = tarr
    cdef Py_ssize_t n = tv.shape[0], m = tv.shape[1], i, j, q, nsub
    res = np.empty((n, m, 3))
    cdef double[:, :, ::1] rv = res
    cdef double state[5]
    cdef double hmax, tcur, seg, h
    with nogil:
        for i in range(n):
            state[0] = gv[i]
            state[1] = cv[i]
            state[2] = 0.0
            state[3] = 0.0
            state[4] = 0.0
            hmax = tv[i, m - 1] / steps
            tcur = 0.0
            for j in range(m):
                seg = tv[i, j] - tcur
                if seg > 0.0:
                    nsub = <Py_ssize_t> ceil(seg / hmax - 1e-9)
                    if nsub < 1:
                        nsub = 1
                    h = seg / nsub
                    for q in range(nsub):
                        rk4_step(state, h)
                tcur = tv[i, j]
                rv[i, j, 0] = state[2]
                rv[i, j, 1] = state[3]
                rv[i, j, 2] = state[4]
    return res
