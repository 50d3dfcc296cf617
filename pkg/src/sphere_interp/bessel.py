"""Bessel functions of the first kind ``J_nu(x)`` for real ``nu > 0`` and ``x >= 0``.

Three regimes, chosen per argument:

* power series for small ``x`` (little cancellation),
* Miller's backward recurrence in the middle range, normalized by a
  Neumann-type identity,
* the Hankel large-argument expansion once its smallest term is below ``tol``.

Vectorized over ``x``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["BesselOrder", "BesselResult", "bessel_j", "bessel_j_full", "bessel_j_scaled", "half_integer_j"]

#: series is used for ``x <= SERIES_MAX`` (cancellation below ~ e^x / sqrt(x) ulps)
SERIES_MAX = 6.0


@dataclass(frozen=True)
class BesselOrder:
    nu: float

    def __post_init__(self):
        if not (self.nu > 0 and math.isfinite(self.nu)):
            raise ValueError("Bessel order must be positive and finite")

    @classmethod
    def for_dimension(cls, p: int) -> "BesselOrder":
        return cls(p / 2.0 - 1.0)


@dataclass
class BesselResult:
    value: np.ndarray
    error_estimate: np.ndarray
    flagged: bool


def _series(nu: float, x: np.ndarray, tol: float):
    h = 0.25 * x * x
    safe = np.where(x > 0, x, 1.0)
    term = np.where(x > 0, np.exp(nu * np.log(0.5 * safe) - math.lgamma(nu + 1.0)), 0.0)
    s = term.copy()
    big = np.abs(term)
    for j in range(1, 400):
        term = -term * h / (j * (nu + j))
        s += term
        big = np.maximum(big, np.abs(term))
        if j > 2 and np.all(np.abs(term) <= tol * np.abs(s) + 1e-300):
            break
    err = big * 1.1e-16 + np.abs(term)
    return s, err


def _hankel_terms(nu: float, x: np.ndarray, tol: float):
    mu = 4.0 * nu * nu
    chi = x - (0.5 * nu + 0.25) * math.pi
    P = np.ones_like(x)
    Q = np.zeros_like(x)
    a = np.ones_like(x)
    last = np.full_like(x, np.inf)
    done = np.zeros(x.shape, dtype=bool)
    err = np.zeros_like(x)
    for k in range(1, 200):
        a_new = a * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        grow = np.abs(a_new) > last
        stop = ~done & (grow | (np.abs(a_new) < tol))
        err = np.where(stop, np.abs(a_new), err)
        done |= stop
        live = ~done
        if not live.any():
            break
        sgn = (-1) ** (k // 2)
        if k % 2 == 0:
            P = np.where(live, P + sgn * a_new, P)
        else:
            Q = np.where(live, Q + sgn * a_new, Q)
        last = np.where(live, np.abs(a_new), last)
        a = a_new
    amp = np.sqrt(2.0 / (math.pi * x))
    return amp * (P * np.cos(chi) - Q * np.sin(chi)), amp * err


def _miller(nu: float, x: np.ndarray):
    """Backward recurrence from a high order, normalized by a Neumann-type identity.

    With ``nu0 = nu - floor(nu)``:
    ``(x/2)^nu0 = sum_k (nu0 + 2k) Gamma(nu0 + k)/k! J_{nu0+2k}(x)``
    (for ``nu0 = 0`` this is ``1 = J_0 + 2 sum_k J_{2k}``).
    """
    top = int(math.floor(nu + 1e-12))
    nu0 = nu - top
    if nu0 < 1e-12:
        nu0 = 0.0
    xmax = float(x.max())
    N = int(max(nu, xmax) + 30 + 3.0 * xmax ** (1.0 / 3.0)) + 10
    N += N % 2
    # weights for even m = 2k
    w = {}
    if nu0 == 0.0:
        for m in range(0, N + 1, 2):
            w[m] = 1.0 if m == 0 else 2.0
    else:
        g = math.gamma(nu0)
        for k in range(0, N // 2 + 1):
            if k:
                g *= (nu0 + k - 1) / k
            w[2 * k] = (nu0 + 2 * k) * g
    jp1 = np.zeros_like(x)
    jc = np.full_like(x, 1e-30)
    want = jc.copy() if N == top else np.zeros_like(x)
    norm = w[N] * jc
    for m in range(N, 0, -1):
        jm1 = (2.0 * (nu0 + m) / x) * jc - jp1
        jp1, jc = jc, jm1
        if m - 1 == top:
            want = jc.copy()
        if (m - 1) % 2 == 0:
            norm = norm + w[m - 1] * jc
        big = np.abs(jc) > 1e250
        if big.any():
            sc = np.where(big, 1e-250, 1.0)
            jc = jc * sc
            jp1 = jp1 * sc
            want = want * sc
            norm = norm * sc
    lhs = 1.0 if nu0 == 0.0 else (0.5 * x) ** nu0
    return want * lhs / norm


def bessel_j_full(nu, x, tol: float = 1e-14, x_series: float = SERIES_MAX) -> BesselResult:
    """``J_nu(x)`` with a per-point error estimate and a global flag."""
    nu = BesselOrder(float(nu)).nu if not isinstance(nu, BesselOrder) else nu.nu
    if tol <= 0:
        raise ValueError("tol must be positive")
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xa < 0) or not np.all(np.isfinite(xa)):
        raise ValueError("x must be finite and >= 0")
    out = np.zeros_like(xa)
    err = np.zeros_like(xa)
    small = xa <= x_series
    if small.any():
        out[small], err[small] = _series(nu, xa[small], tol)
    rest = ~small
    if rest.any():
        xr = xa[rest]
        hv, he = _hankel_terms(nu, xr, tol)
        ok = he <= tol * np.maximum(np.abs(hv), 1e-3)
        vals = np.where(ok, hv, 0.0)
        errs = np.where(ok, he, 0.0)
        need = ~ok
        if need.any():
            vals[need] = _miller(nu, xr[need])
            errs[need] = 1e-15 * np.sqrt(2.0 / (math.pi * xr[need])) * max(1.0, nu)
        out[rest] = vals
        err[rest] = errs
    flagged = bool(np.any(err > tol * np.maximum(1.0, np.abs(out))))
    shape = np.shape(x)
    return BesselResult(out.reshape(shape), err.reshape(shape), flagged)


def bessel_j(nu, x, tol: float = 1e-14):
    """``J_nu(x)``; returns a float for scalar ``x`` and an array otherwise."""
    res = bessel_j_full(nu, x, tol)
    if np.ndim(x) == 0:
        return float(res.value)
    return res.value


def bessel_j_scaled(nu: float, x) -> np.ndarray:
    """``Gamma(nu+1) (2/x)^nu J_nu(x)``, i.e. ``0F1(; nu+1; -x^2/4)``; equals 1 at ``x = 0``.

    Bounded by 1 in absolute value and free of overflow for large orders.
    Direct series while ``x^2/4 <= nu + 1`` (no term exceeds the first),
    otherwise rescaled from :func:`bessel_j_full`.
    """
    nu = BesselOrder(float(nu)).nu
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xa < 0) or not np.all(np.isfinite(xa)):
        raise ValueError("x must be finite and >= 0")
    out = np.ones_like(xa)
    small = xa <= max(SERIES_MAX, 2.0 * math.sqrt(nu + 1.0))
    if small.any():
        h = 0.25 * xa[small] ** 2
        term = np.ones_like(h)
        s = term.copy()
        for j in range(1, 400):
            term = -term * h / (j * (nu + j))
            s += term
            if np.all(np.abs(term) <= 1e-17 * np.abs(s) + 1e-300):
                break
        out[small] = s
    big = ~small
    if big.any():
        xb = xa[big]
        out[big] = bessel_j_full(nu, xb).value * np.exp(math.lgamma(nu + 1.0) - nu * np.log(0.5 * xb))
    return out.reshape(np.shape(x)) if np.ndim(x) else float(out[0])


def half_integer_j(nu: float, x: float) -> float:
    """Closed trigonometric form of ``J_{l+1/2}`` via spherical Bessel upward recurrence.

    Accurate when ``x`` is not small compared with ``nu``; used as an oracle.
    """
    l = nu - 0.5
    if abs(l - round(l)) > 1e-14 or l < 0:
        raise ValueError("order must be l + 1/2 with integer l >= 0")
    l = int(round(l))
    j0 = math.sin(x) / x
    if l == 0:
        return math.sqrt(2 * x / math.pi) * j0
    j1 = math.sin(x) / x**2 - math.cos(x) / x
    for m in range(1, l):
        j0, j1 = j1, (2 * m + 1) / x * j1 - j0
    return math.sqrt(2 * x / math.pi) * j1
