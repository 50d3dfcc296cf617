"""Pure numpy versions of the compiled kernels in ``_speedups.pyx``.

Same signatures and return values; used when the extension is not built or
when ``SPHERE_INTERP_BACKEND=python`` is set.
"""
from __future__ import annotations

import numpy as np

_B2J = np.array([1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0])
_FACT2J = np.array([2.0, 24.0, 720.0, 40320.0, 3628800.0, 479001600.0, 87178291200.0])


def _vgcd(a, b):
    a = np.abs(np.asarray(a, dtype=np.int64)).copy()
    b = np.abs(np.broadcast_to(np.asarray(b, dtype=np.int64), a.shape)).copy()
    while np.any(b):
        nz = b != 0
        t = b[nz].copy()
        b[nz] = a[nz] % b[nz]
        a[nz] = t
    return a


def _vmodinv(d, m):
    """Modular inverse of each ``d`` modulo the scalar ``m`` (assumes coprime)."""
    a = np.mod(np.asarray(d, dtype=np.int64), m)
    b = np.full_like(a, m)
    x0 = np.ones_like(a)
    x1 = np.zeros_like(a)
    while np.any(b):
        nz = b != 0
        q = np.zeros_like(a)
        q[nz] = a[nz] // b[nz]
        a_new = np.where(nz, b, a)
        b_new = np.where(nz, a - q * b, b)
        x0_new = np.where(nz, x1, x0)
        x1_new = np.where(nz, x0 - q * x1, x1)
        a, b, x0, x1 = a_new, b_new, x0_new, x1_new
    return np.mod(x0, m)


def _vjacobi(a, n):
    """Jacobi symbols ``(a_i / n_i)`` for odd positive ``n_i``."""
    a = np.asarray(a, dtype=np.int64).copy()
    n = np.broadcast_to(np.asarray(n, dtype=np.int64), a.shape).copy()
    a = np.mod(a, n)
    t = np.ones_like(a)
    while True:
        live = a != 0
        if not live.any():
            break
        while True:
            ev = live & (a % 2 == 0)
            if not ev.any():
                break
            a[ev] //= 2
            r = n[ev] % 8
            t[ev] *= np.where((r == 3) | (r == 5), -1, 1)
        a2 = np.where(live, n, a)
        n2 = np.where(live, a, n)
        flip = live & (a2 % 4 == 3) & (n2 % 4 == 3)
        t[flip] *= -1
        a = np.where(live, a2 % np.where(live, n2, 1), 0)
        n = n2
    return np.where(n == 1, t, 0)


def _gauss_exp(c: int, d):
    d = np.asarray(d, dtype=np.int64)
    if c % 2 == 0:
        dd = np.mod(d, 2 * c)
        e = np.where(dd % 4 == 1, 0, 2)
        e = e + np.where(_vjacobi(np.full_like(dd, 2 * c), dd) < 0, 4, 0)
        return (e + 7) % 8
    e0 = 0 if c % 4 == 1 else 6
    e = e0 + np.where(_vjacobi(2 * d, np.full_like(d, c)) < 0, 4, 0)
    return e % 8


def _alpha(c: int, d, parity: int):
    d = np.asarray(d, dtype=np.int64)
    if parity == 0:
        inv = _vmodinv(d, 2 * c)
        return np.where(inv < c, inv, inv - 2 * c)
    if c == 1:
        return np.zeros_like(d)
    inv = _vmodinv(d, c)
    return np.where(inv % 2 == 0, inv, inv - c)


def row_data(parity: int, c: int):
    start = -c + 1
    if (start - c) % 2 == 0:
        start += 1
    d = np.arange(start, c + 1, 2, dtype=np.int64)
    d = d[_vgcd(d, c) == 1]
    return d, _alpha(c, d, parity).astype(np.int64), _gauss_exp(c, d).astype(np.int64)


def twisted_sums(parity: int, c_start: int, c_stop: int, r2, n_max: int):
    r2 = np.asarray(r2, dtype=float)
    c0 = c_start + ((c_start % 2) != parity)
    cs = list(range(c0, c_stop, 2))
    out = np.zeros((len(cs), 8, len(r2), n_max), dtype=complex)
    nn = np.arange(1, n_max + 1)
    for ic, c in enumerate(cs):
        d = np.arange(0 if parity else 1, 2 * c, 2, dtype=np.int64)
        d = d[_vgcd(d, c) == 1]
        a = _alpha(c, d, parity)
        e = _gauss_exp(c, d)
        z = np.exp(1j * np.pi * np.outer(a, r2) / c)            # (nd, R)
        q = np.exp(1j * np.pi * np.outer(d, nn) / c)            # (nd, N)
        for ee in range(8):
            sel = e == ee
            if sel.any():
                out[ic, ee] = z[sel].T @ q[sel]
    return out


def _tail(w, sigma: float, X: np.ndarray, k: float, beta: np.ndarray):
    z = -1j * (w + 2.0 * sigma * X)
    zk = np.exp(-k * np.log(z))
    iz = 1.0 / z
    g = np.ones_like(z)
    acc = np.zeros_like(z)
    size0 = None
    for t in range(200):
        s = k + t
        br = 1j * z / (2.0 * sigma) / (s - 1.0) + 0.5
        q = iz.copy()
        rising = s
        for j in range(_B2J.size):
            m = 2 * j + 1
            f = _B2J[j] / _FACT2J[j] * rising * (2.0 * sigma) ** m * (-1) ** j
            br = br - 1j * f * q
            rising *= (s + m) * (s + m + 1)
            q = q * iz * iz
        term = g * zk * br
        acc = acc + term
        mag = np.abs(term)
        if size0 is None:
            size0 = mag + 1e-300
        elif np.all((mag < 1e-18 * size0) & (np.abs(g) < 1e-18)):
            break
        if not np.any(beta):
            break
        g = g * iz * (-np.pi * beta) / (t + 1)
    return acc


def periodized_sum(c, d0, alpha, e, p: int, r2: float, nodes, L: int = 6):
    c = np.asarray(c, dtype=np.int64)
    d0 = np.asarray(d0, dtype=np.int64)
    alpha = np.asarray(alpha, dtype=np.int64)
    e = np.asarray(e, dtype=np.int64)
    nodes = np.asarray(nodes, dtype=complex)
    k = 0.5 * p
    out = np.zeros(nodes.shape, dtype=complex)
    cf = c.astype(float)
    beta_all = r2 / cf**2
    Lr_all = L + np.ceil(np.pi * np.abs(beta_all) - 1e-3).astype(int)
    coef = cf ** (-k) * np.exp(1j * np.pi * (((p * e) % 8) / 4.0 + alpha * r2 / cf))
    # group rows by window width to keep arrays rectangular
    for Lr in np.unique(Lr_all):
        sel = Lr_all == Lr
        for lo in range(0, int(sel.sum()), 512):
            idx = np.flatnonzero(sel)[lo:lo + 512]
            w = nodes[None, :] + (d0[idx] / cf[idx])[:, None]        # (rows, nodes)
            beta = beta_all[idx][:, None]
            s = np.zeros_like(w)
            for l in range(-Lr, Lr + 1):
                u = w + 2.0 * l
                s += np.exp(-k * np.log(-1j * u) - 1j * np.pi * beta / u)
            s += _tail(w, 1.0, Lr + 1, k, beta)
            s += _tail(w, -1.0, Lr + 1, k, beta)
            out += coef[idx] @ s
    return out


def box_sum(c, d, alpha, e, p: int, r2: complex, tau: complex) -> complex:
    c = np.asarray(c, dtype=float)
    d = np.asarray(d, dtype=float)
    k = 0.5 * p
    w = tau + d / c
    mt = np.asarray(alpha, dtype=float) / c - 1.0 / (c * c * w)
    ph = np.pi * ((p * np.asarray(e)) % 8) / 4.0
    val = np.exp(-k * np.log(-1j * w) - k * np.log(c) + 1j * ph + 1j * np.pi * r2 * mt)
    return complex(val.sum())


__all__ = ["row_data", "twisted_sums", "periodized_sum", "box_sum"]
