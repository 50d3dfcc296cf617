"""Independent reference computations shared by the tests."""
import math

import numpy as np


def series_power(coeffs, power, n_terms):
    """Truncated power of an integer q-series given by its coefficient list."""
    out = np.zeros(n_terms, dtype=object)
    out[0] = 1
    base = np.zeros(n_terms, dtype=object)
    for i, c in enumerate(coeffs[:n_terms]):
        base[i] = c
    for _ in range(power):
        nxt = np.zeros(n_terms, dtype=object)
        for i in range(n_terms):
            if out[i]:
                nxt[i:] += out[i] * base[: n_terms - i]
        out = nxt
    return [int(v) for v in out]


def b8_at_zero(n_max):
    """``b_{8,n}(0)``: coefficients of ``1 - Theta_4(2 tau)^8`` in ``q = e^{pi i tau}``."""
    t4 = [0] * (n_max + 1)
    k = 0
    while 2 * k * k <= n_max:
        t4[2 * k * k] += (1 if k == 0 else 2) * (-1) ** k
        k += 1
    p = series_power(t4, 8, n_max + 1)
    return [-p[n] for n in range(1, n_max + 1)]


def b8_tilde_at_zero(n_max):
    """``b~_{8,n}(0)``: coefficients of ``Theta_2(tau/2)^8 / 16 = 16 q (sum_k q^{k(k+1)/2})^8``."""
    tri = [0] * n_max
    k = 0
    while k * (k + 1) // 2 < n_max:
        tri[k * (k + 1) // 2] += 1
        k += 1
    p = series_power(tri, 8, n_max)
    return [16 * p[n - 1] for n in range(1, n_max + 1)]


def brute_F(p, tau, c_max, d_half, tilde=False):
    """``F_p(tau, 0)`` over a box by the Gauss-sum transformation law, without alpha entries."""
    from sphere_interp.modular import branch_power, g_small

    total = 0j
    for c in range(1 if tilde else 2, c_max + 1, 2):
        for d in range(-d_half, d_half + 1):
            if (d - c) % 2 == 0 or math.gcd(c, d) != 1:
                continue
            g = g_small(c, d).value
            total += g ** (-p) * branch_power(tau + d / c, -p / 2)
    return total if tilde else -total
