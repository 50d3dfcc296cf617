# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for the (c, d) sums.

Row conventions match ``words.py``: parity 0 means even ``c`` with odd ``d``
(the P rows), parity 1 means odd ``c`` with even ``d`` (the Ptilde rows).
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, exp, log, atan2, fabs, sqrt, M_PI

cnp.import_array()

ctypedef long long i64


cdef inline i64 _gcd(i64 a, i64 b) noexcept nogil:
    if a < 0:
        a = -a
    if b < 0:
        b = -b
    while b:
        a, b = b, a % b
    return a


cdef inline i64 _modinv(i64 d, i64 m) noexcept nogil:
    cdef i64 a = d % m, b = m, x0 = 1, x1 = 0, q, t
    if a < 0:
        a += m
    while b:
        q = a // b
        t = a - q * b
        a = b
        b = t
        t = x0 - q * x1
        x0 = x1
        x1 = t
    x0 %= m
    if x0 < 0:
        x0 += m
    return x0


cdef inline int _jacobi(i64 a, i64 n) noexcept nogil:
    cdef int t = 1
    cdef i64 r, tmp
    a %= n
    if a < 0:
        a += n
    while a:
        while a % 2 == 0:
            a //= 2
            r = n % 8
            if r == 3 or r == 5:
                t = -t
        tmp = a
        a = n
        n = tmp
        if a % 4 == 3 and n % 4 == 3:
            t = -t
        a %= n
    return t if n == 1 else 0


cdef inline int _gauss_exp(i64 c, i64 d) noexcept nogil:
    # sqrt(c)/g_c(d) = exp(i pi e/4)
    cdef i64 dd
    cdef int e
    if c % 2 == 0:
        dd = d % (2 * c)
        if dd < 0:
            dd += 2 * c
        e = 0 if dd % 4 == 1 else 2
        if _jacobi(2 * c, dd) < 0:
            e += 4
        return (e + 7) % 8
    e = 0 if c % 4 == 1 else 6
    if _jacobi(2 * d, c) < 0:
        e += 4
    return e % 8


cdef inline i64 _alpha(i64 c, i64 d, int parity) noexcept nogil:
    cdef i64 inv
    if parity == 0:
        inv = _modinv(d, 2 * c)
        return inv if inv < c else inv - 2 * c
    if c == 1:
        return 0
    inv = _modinv(d, c)
    return inv if inv % 2 == 0 else inv - c


def row_data(int parity, i64 c):
    """Residue rows of one ``c``: arrays ``d0, alpha, e`` with ``d0`` in ``(-c, c]``."""
    cdef list ds = [], al = [], es = []
    cdef i64 d
    cdef i64 start = -c + 1
    if (start - c) % 2 == 0:
        start += 1
    d = start
    while d <= c:
        if _gcd(c, d) == 1:
            ds.append(d)
            al.append(_alpha(c, d, parity))
            es.append(_gauss_exp(c, d))
        d += 2
    return (np.asarray(ds, dtype=np.int64), np.asarray(al, dtype=np.int64),
            np.asarray(es, dtype=np.int64))


def twisted_sums(int parity, i64 c_start, i64 c_stop, double[::1] r2, int n_max):
    """Partial Kloosterman sums grouped by Gauss exponent.

    Returns ``T`` of shape ``(nc, 8, R, n_max)`` where for each admissible
    ``c`` in ``[c_start, c_stop)``
    ``T[ic, e, j, n-1] = sum_{d mod 2c, e(c,d) = e} exp(pi i (alpha r2[j] + d n)/c)``.
    """
    cdef i64 c0 = c_start
    if (c0 % 2) != parity:
        c0 += 1
    cdef i64 nc = 0 if c_stop <= c0 else (c_stop - c0 + 1) // 2
    cdef int R = r2.shape[0]
    out = np.zeros((nc, 8, R, n_max, 2), dtype=np.float64)
    cdef double[:, :, :, :, ::1] T = out
    cdef double[::1] zr = np.empty(R), zi = np.empty(R)
    cdef i64 ic, c, d, a, dstart
    cdef int e, j, n
    cdef double ph, qr, qi, pr, pi_, t
    with nogil:
        for ic in range(nc):
            c = c0 + 2 * ic
            dstart = 0 if parity == 1 else 1
            d = dstart
            while d < 2 * c:
                if _gcd(c, d) == 1:
                    a = _alpha(c, d, parity)
                    e = _gauss_exp(c, d)
                    for j in range(R):
                        ph = M_PI * a * r2[j] / c
                        zr[j] = cos(ph)
                        zi[j] = sin(ph)
                    ph = M_PI * d / c
                    qr = cos(ph)
                    qi = sin(ph)
                    pr = qr
                    pi_ = qi
                    for n in range(n_max):
                        for j in range(R):
                            T[ic, e, j, n, 0] += zr[j] * pr - zi[j] * pi_
                            T[ic, e, j, n, 1] += zr[j] * pi_ + zi[j] * pr
                        t = pr * qr - pi_ * qi
                        pi_ = pr * qi + pi_ * qr
                        pr = t
                d += 2
    return out[..., 0] + 1j * out[..., 1]


cdef inline void _zpow(double zr, double zi, int p, double *outr, double *outi) noexcept nogil:
    # z^{-p/2} on Re z > 0 (principal branch): integer power of 1/z times 1/sqrt(z)
    cdef double den = zr * zr + zi * zi
    cdef double br = zr / den, bi = -zi / den          # 1/z
    cdef double rr = 1.0, ri = 0.0, t, a
    cdef int n = p // 2
    while n > 0:
        if n & 1:
            t = rr * br - ri * bi
            ri = rr * bi + ri * br
            rr = t
        t = br * br - bi * bi
        bi = 2.0 * br * bi
        br = t
        n >>= 1
    if p & 1:
        # 1/sqrt(z) = sqrt(1/z); principal sqrt of w with Re w > 0
        br = zr / den
        bi = -zi / den
        a = sqrt(0.5 * (sqrt(br * br + bi * bi) + br))
        t = rr * a - ri * (bi / (2.0 * a))
        ri = rr * (bi / (2.0 * a)) + ri * a
        rr = t
    outr[0] = rr
    outi[0] = ri


DEF NBERN = 7
cdef double[7] _B2J = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0]
cdef double[7] _FACT2J = [2.0, 24.0, 720.0, 40320.0, 3628800.0, 479001600.0, 87178291200.0]


cdef inline void _tail(double wr, double wi, double sigma, int X, int p, double beta,
                       double *outr, double *outi) noexcept nogil:
    # sum_{l >= X} (-i(w + 2 sigma l))^{-k} exp(-i pi beta / (w + 2 sigma l))
    cdef double ur = wr + 2.0 * sigma * X, ui = wi
    cdef double zr = ui, zi = -ur          # z = -i u
    cdef double k = 0.5 * p
    cdef double pkr, pki
    _zpow(zr, zi, p, &pkr, &pki)                                       # z^{-k}
    cdef double den = zr * zr + zi * zi
    cdef double ivr = zr / den, ivi = -zi / den                        # 1/z
    cdef double gr = 1.0, gi = 0.0        # gamma_t z^{-t}
    cdef double accr = 0.0, acci = 0.0
    cdef double s, br, bi, tr, ti, qr, qi, fr, fi, hr, hi, rising, cr, ci, sp
    cdef int t, j, m
    cdef double size0 = 1.0
    for t in range(200):
        s = k + t
        # bracket = z/((s-1)(-2 i sigma)) + 1/2 - sum_j B2j/(2j)! (2 i sigma)^{2j-1} rising(s,2j-1) z^{-(2j-1)}
        # z/(-2 i sigma) = i z/(2 sigma)
        br = -zi / (2.0 * sigma) / (s - 1.0) + 0.5
        bi = zr / (2.0 * sigma) / (s - 1.0)
        # (2 i sigma)^{2j-1} = (2 sigma)^{2j-1} i (-1)^{j-1}
        qr = ivr
        qi = ivi           # z^{-(2j-1)}
        rising = s
        sp = 2.0 * sigma
        for j in range(NBERN):
            m = 2 * j + 1
            fr = _B2J[j] / _FACT2J[j] * rising * sp
            sp *= 4.0
            if j % 2 == 1:
                fr = -fr
            # times i * q
            hr = -fr * qi
            hi = fr * qr
            br -= hr
            bi -= hi
            rising *= (s + m) * (s + m + 1)
            tr = qr * ivr - qi * ivi
            ti = qr * ivi + qi * ivr
            qr = tr * ivr - ti * ivi
            qi = tr * ivi + ti * ivr
        # term = gamma_t z^{-t} * z^{-k} * bracket
        cr = gr * pkr - gi * pki
        ci = gr * pki + gi * pkr
        tr = cr * br - ci * bi
        ti = cr * bi + ci * br
        accr += tr
        acci += ti
        if t == 0:
            size0 = fabs(tr) + fabs(ti) + 1e-300
        elif fabs(tr) + fabs(ti) < 1e-18 * size0 and fabs(gr) + fabs(gi) < 1e-18:
            break
        if beta == 0.0:
            break
        # gamma_{t+1} z^{-t-1} = gamma_t z^{-t} * (-pi beta)/(t+1) / z
        tr = (gr * ivr - gi * ivi) * (-M_PI * beta) / (t + 1)
        ti = (gr * ivi + gi * ivr) * (-M_PI * beta) / (t + 1)
        gr = tr
        gi = ti
    outr[0] = accr
    outi[0] = acci


cdef inline void _direct(double ur, double ui, int p, double beta, double *outr, double *outi) noexcept nogil:
    # (-i u)^{-p/2} exp(-i pi beta / u)
    cdef double zr, zi, den, m, ph
    _zpow(ui, -ur, p, &zr, &zi)
    if beta == 0.0:
        outr[0] = zr
        outi[0] = zi
        return
    den = ur * ur + ui * ui
    m = exp(-M_PI * beta * ui / den)
    ph = -M_PI * beta * ur / den
    outr[0] = m * (zr * cos(ph) - zi * sin(ph))
    outi[0] = m * (zr * sin(ph) + zi * cos(ph))


def periodized_sum(i64[::1] c, i64[::1] d0, i64[::1] alpha, i64[::1] e, int p,
                   double r2, cnp.complex128_t[::1] nodes, int L=6):
    """``sum_rows c^{-k} w_e^p exp(i pi alpha r2/c) sum_l (-i(tau + d0/c + 2l))^{-k} exp(-i pi r2/(c^2 (tau + d0/c + 2l)))``.

    The inner sum runs over all integers ``l``: directly for ``|l| <= L``,
    by an Euler-Maclaurin tail beyond.
    """
    cdef Py_ssize_t nr = c.shape[0], nn = nodes.shape[0], i, j
    cdef double k = 0.5 * p
    out = np.zeros((nn, 2), dtype=np.float64)
    cdef double[:, ::1] O = out
    cdef double cr, ci, wr, wi, beta, ph, amp, sr, si, tr, ti, xr, xi
    cdef int l, Lr
    with nogil:
        for i in range(nr):
            beta = r2 / (<double>c[i] * c[i])
            # widen the direct window when the exponential factor is far from 1
            Lr = L + <int>(M_PI * fabs(beta) + 0.999)
            ph = M_PI * (((p * e[i]) % 8) / 4.0 + alpha[i] * r2 / c[i])
            amp = exp(-k * log(<double>c[i]))
            cr = amp * cos(ph)
            ci = amp * sin(ph)
            for j in range(nn):
                wr = nodes[j].real + (<double>d0[i]) / c[i]
                wi = nodes[j].imag
                sr = 0.0
                si = 0.0
                for l in range(-Lr, Lr + 1):
                    _direct(wr + 2.0 * l, wi, p, beta, &tr, &ti)
                    sr += tr
                    si += ti
                _tail(wr, wi, 1.0, Lr + 1, p, beta, &tr, &ti)
                sr += tr
                si += ti
                _tail(wr, wi, -1.0, Lr + 1, p, beta, &tr, &ti)
                sr += tr
                si += ti
                O[j, 0] += cr * sr - ci * si
                O[j, 1] += cr * si + ci * sr
    return out[:, 0] + 1j * out[:, 1]


def box_sum(i64[::1] c, i64[::1] d, i64[::1] alpha, i64[::1] e, int p,
            double complex r2, double complex tau):
    """``sum_rows g_c(d)^{-p} (-i(tau + d/c))^{-p/2} exp(pi i r2 (alpha/c - 1/(c(c tau + d))))``."""
    cdef Py_ssize_t nr = c.shape[0], i
    cdef double k = 0.5 * p
    cdef double accr = 0.0, acci = 0.0
    cdef double cc, wr, wi, zr, zi, lr, li, den, vr, vi, er, ei, mr, mi, ph, m
    cdef double tr = tau.real, ti = tau.imag, rr = r2.real, ri = r2.imag
    with nogil:
        for i in range(nr):
            cc = <double>c[i]
            wr = tr + d[i] / cc
            wi = ti
            zr = wi
            zi = -wr
            lr = 0.5 * log(zr * zr + zi * zi)
            li = atan2(zi, zr)
            # M tau = alpha/c - 1/(c^2 w)
            den = wr * wr + wi * wi
            vr = alpha[i] / cc - wr / (den * cc * cc)
            vi = wi / (den * cc * cc)
            # pi i r2 * Mtau
            mr = rr * vr - ri * vi
            mi = rr * vi + ri * vr
            er = -k * lr - k * log(cc) - M_PI * mi
            ei = -k * li + M_PI * mr + M_PI * ((p * e[i]) % 8) / 4.0
            m = exp(er)
            accr += m * cos(ei)
            acci += m * sin(ei)
    return complex(accr, acci)
