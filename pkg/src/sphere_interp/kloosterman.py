"""Closed-form coefficients through Bessel functions and Kloosterman-type sums.

For ``r > 0``::

    b_{p,n}(r) = -pi (n/r^2)^{p/4-1/2} sum_{c even} S_p(r,n,c) J_{p/2-1}(2 pi r sqrt(n)/c) / c
    S_p(r,n,c) = sum_{d mod 2c, (c,d)=1} (sqrt(c)/g_c(d))^p exp(pi i (alpha(c,d) r^2 + d n)/c)

and for ``r = 0`` the Bessel factor is replaced by its leading power, giving
``-pi (pi n)^{p/2-1}/Gamma(p/2) sum_c c^{-p/2} S_p(0,n,c)``.  The tilde
coefficients use the same shape with sign ``+``, odd ``c`` and even ``d``.

The c-series converges slowly for small ``p`` (the tail is ``O(C^{3/2-p/2})``
on average).  :class:`ClosedFormTable` records partial sums along the way and
can extrapolate the mean tail; the resulting error estimate is empirical.
"""
from __future__ import annotations

import cmath
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from . import _backend
from .bessel import BesselOrder, bessel_j, bessel_j_full, bessel_j_scaled
from .modular import g_small, gauss_root_exponent
from .results import CoefficientResult
from .words import BottomRow, alpha_entry

__all__ = [
    "BesselOrder",
    "bessel_j",
    "KloostermanSumValue",
    "kloosterman_sum",
    "classical_kloosterman",
    "ClosedFormTable",
    "closed_form_table",
    "coeff_closed",
    "poincare_coeff",
    "poincare_sigma",
    "closed_tail_bound",
    "DEFAULT_CLOSED_CMAX",
]

DEFAULT_CLOSED_CMAX = 400


@dataclass(frozen=True)
class KloostermanSumValue:
    p: int
    n: int
    r: float
    c: int
    value: complex
    kind: str

    @property
    def n_terms(self) -> int:
        c = self.c
        if self.kind == "even_c":
            return sum(1 for d in range(1, 2 * c, 2) if math.gcd(c, d) == 1)
        return sum(1 for d in range(0, 2 * c, 2) if math.gcd(c, d) == 1)


def kloosterman_sum(p: int, n: int, r: float, c: int, kind: str = "even_c") -> KloostermanSumValue:
    """Direct O(c) evaluation of ``S_p(r,n,c)`` (``even_c``) or its tilde partner (``odd_c``).

    Uses :func:`alpha_entry` and the summed Gauss sum :func:`g_small`; this is
    the reference the compiled tables are tested against.
    """
    if kind == "even_c":
        if c < 2 or c % 2:
            raise ValueError("even_c sums need even c >= 2")
        ds = range(1, 2 * c, 2)
        rk = "P"
    elif kind == "odd_c":
        if c < 1 or c % 2 == 0:
            raise ValueError("odd_c sums need odd c >= 1")
        ds = range(0, 2 * c, 2)
        rk = "Ptilde"
    else:
        raise ValueError("kind must be 'even_c' or 'odd_c'")
    if n < 1:
        raise ValueError("n must be >= 1")
    total = 0j
    sc = math.sqrt(c)
    for d in ds:
        if math.gcd(c, d) != 1:
            continue
        a = alpha_entry(BottomRow(c, d, rk))
        g = g_small(c, d).value
        total += (sc / g) ** p * cmath.exp(1j * math.pi * (a * r * r + d * n) / c)
    return KloostermanSumValue(p, n, float(r), c, total, kind)


def classical_kloosterman(m: int, n: int, c: int, k: int) -> complex:
    """``S_{chi^k}(m,n,c) = sum_{d in (Z/c)^x} chi(d)^k e((dbar m + n d)/c)`` for ``4 | c``."""
    if c % 4:
        raise ValueError("c must be divisible by 4")
    d = np.array([x for x in range(1, c) if math.gcd(x, c) == 1], dtype=np.int64)
    dbar = np.array([pow(int(x), -1, c) for x in d], dtype=np.int64)
    chi = np.where(d % 4 == 1, 1.0, -1.0) ** (k % 2)
    ph = 2 * np.pi * ((dbar * m + n * d) % c) / c
    return complex((chi * np.exp(1j * ph)).sum())


def _classical_block(c: int, k: int, mmax: int, nmax: int) -> np.ndarray:
    """``S_{chi^k}(m,n,c)`` for all ``1 <= m <= mmax``, ``1 <= n <= nmax``."""
    d = np.arange(1, c, 2, dtype=np.int64)
    d = d[np.gcd(d, c) == 1]
    dbar = np.array([pow(int(x), -1, c) for x in d], dtype=np.int64)
    chi = np.where(d % 4 == 1, 1.0, -1.0) ** (k % 2)
    U = np.exp(2j * np.pi * np.outer(dbar, np.arange(1, mmax + 1)) / c)
    V = np.exp(2j * np.pi * np.outer(d, np.arange(1, nmax + 1)) / c)
    return (U * chi[:, None]).T @ V


def poincare_sigma(k: int, m: int, n: int, c_max: int) -> complex:
    """``sigma_k(m,n)`` truncated to ``c <= c_max`` (``c = 0 mod 4``)."""
    s = 0j
    x0 = 4 * math.pi * math.sqrt(n * m)
    for c in range(4, c_max + 1, 4):
        s += classical_kloosterman(m, n, c, k) * bessel_j(k - 1, x0 / c) / c
    return s


def poincare_coeff(k: int, m: int, n: int, tol: float = 1e-8, c_max: Optional[int] = None) -> complex:
    """Fourier coefficient ``2 pi i^{-k} (n/m)^{(k-1)/2} (delta(m,n) + sigma_k(m,n))``.

    ``c_max`` defaults to the smallest multiple of 4 for which the trivial tail
    bound ``sum_{c > C} phi(c)/c |J_{k-1}|`` falls below ``tol``, capped at 20000.
    """
    if k < 3 or m < 1 or n < 1:
        raise ValueError("need k >= 3 and m, n >= 1")
    if c_max is None:
        c_max = _poincare_cmax(k, m, n, tol)
    sigma = poincare_sigma(k, m, n, c_max)
    delta = 1.0 if m == n else 0.0
    return 2 * math.pi * (1j) ** (-k) * (n / m) ** ((k - 1) / 2) * (delta + sigma)


def _poincare_cmax(k: int, m: int, n: int, tol: float) -> int:
    # |S| <= c/2, |J_{k-1}(x)| <= (x/2)^{k-1}/(k-1)!  =>  tail <= K C^{2-k}/(4(k-2))
    K = 0.5 * (2 * math.pi * math.sqrt(n * m)) ** (k - 1) / math.factorial(k - 1)
    C = (K / (4 * (k - 2) * tol)) ** (1.0 / (k - 2))
    return int(min(20000, 4 * math.ceil(max(C, 4) / 4)))


def poincare_table(k: int, mmax: int, nmax: int, c_max: int) -> np.ndarray:
    """``sigma_k(m,n)`` for all ``m <= mmax``, ``n <= nmax`` at once."""
    mm = np.arange(1, mmax + 1)[:, None]
    nn = np.arange(1, nmax + 1)[None, :]
    x0 = 4 * np.pi * np.sqrt(mm * nn)
    out = np.zeros((mmax, nmax), dtype=complex)
    for c in range(4, c_max + 1, 4):
        out += _classical_block(c, k, mmax, nmax) * bessel_j(k - 1, x0 / c) / c
    return out


# ---------------------------------------------------------------------------
# closed-form tables
# ---------------------------------------------------------------------------

def closed_tail_bound(p: int, n: int, r: float, c_max: int) -> float:
    """Rigorous bound on the omitted ``c > c_max`` terms from ``|S| <= c`` and ``|J_nu(x)| <= (x/2)^nu/Gamma(nu+1)``."""
    nu = p / 2.0 - 1.0
    K = math.pi * (math.pi * n) ** nu / math.gamma(nu + 1.0)
    C = float(c_max)
    # terms K c^{-nu} over every other c
    return K * (C ** (1.0 - nu) / (2.0 * (nu - 1.0)) + C ** (-nu))


@dataclass
class ClosedFormTable:
    """Closed-form partial sums for a grid of ``(p, r, n)`` at one truncation.

    ``partial[p_i, r_i, n-1]`` is the sum over ``c <= c_max``;
    ``extrapolated`` adds the fitted mean tail; ``error`` estimates its error.
    """

    tilde: bool
    p_values: Tuple[int, ...]
    r_values: Tuple[float, ...]
    n_max: int
    c_max: int
    partial: np.ndarray
    extrapolated: np.ndarray
    error: np.ndarray
    checkpoints: np.ndarray
    history: np.ndarray

    def index(self, p: int, r: float, n: int):
        return self.p_values.index(p), self.r_values.index(float(r)), n - 1


def _fit_tail(Cs: np.ndarray, P: np.ndarray, gamma: float):
    """Least-squares ``P(C) = b + a C^{-gamma}``; returns ``(b, rms)``."""
    A = np.stack([np.ones_like(Cs), Cs ** (-gamma)], axis=1)
    coef, *_ = np.linalg.lstsq(A, P, rcond=None)
    res = P - A @ coef
    return coef[0], float(np.sqrt(np.mean(np.abs(res) ** 2)))


def closed_form_table(p_values: Sequence[int], n_max: int, r_values: Sequence[float], c_max: int,
                      tilde: bool = False, chunk: Optional[int] = None, threads: int = 1) -> ClosedFormTable:
    """Evaluate the closed forms for all requested ``(p, r, n <= n_max)`` in one pass over ``c``."""
    p_values = tuple(int(p) for p in p_values)
    r_values = tuple(float(r) for r in r_values)
    if any(p < 5 for p in p_values):
        raise ValueError("p must be >= 5")
    if n_max < 1 or c_max < 1 or any(r < 0 for r in r_values):
        raise ValueError("need n_max >= 1, c_max >= 1 and r >= 0")
    if chunk is None:
        # enough checkpoints for the tail fit at small c_max
        chunk = max(1, min(64, c_max // 32))
    parity = 1 if tilde else 0
    sgn = 1.0 if tilde else -1.0
    r_arr = np.array(r_values)
    r2 = r_arr * r_arr
    nn = np.arange(1, n_max + 1, dtype=float)
    P = len(p_values)
    R = len(r_values)
    roots = np.exp(1j * np.pi * np.outer(p_values, np.arange(8)) / 4.0)    # (P, 8)

    # sgn pi (pi n)^nu / Gamma(nu+1), nu = p/2 - 1, in log space: (P, N)
    pref = np.zeros((P, n_max))
    for i, p in enumerate(p_values):
        nu = p / 2.0 - 1.0
        pref[i] = sgn * math.pi * np.exp(nu * np.log(math.pi * nn) - math.lgamma(nu + 1.0))

    c_first = 1 if tilde else 2
    bounds = []
    lo = c_first
    while lo <= c_max:
        hi = min(c_max + 1, lo + 2 * chunk)
        bounds.append((lo, hi))
        lo = hi

    def block(b):
        lo, hi = b
        T = _backend.twisted_sums(parity, lo, hi, r2, n_max)            # (nc, 8, R, N)
        cs = np.arange(lo + ((lo % 2) != parity), hi, 2, dtype=float)
        S = np.einsum("cerN,pe->pcrN", T, roots)
        out = np.zeros((P, R, n_max), dtype=complex)
        for i, p in enumerate(p_values):
            nu = p / 2.0 - 1.0
            w = cs[:, None] ** (-(nu + 1.0))                                   # (nc, 1)
            for j, r in enumerate(r_values):
                if r > 0:
                    x = 2 * np.pi * r * np.sqrt(nn)[None, :] / cs[:, None]    # (nc, N)
                    out[i, j] = (S[i, :, j, :] * bessel_j_scaled(nu, x) * w).sum(axis=0)
                else:
                    out[i, j] = (S[i, :, j, :] * w).sum(axis=0)
        return hi - 1, out * pref[:, None, :]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(block, bounds))
    else:
        parts = [block(b) for b in bounds]

    cps = np.array([c for c, _ in parts], dtype=float)
    hist = np.cumsum(np.stack([v for _, v in parts]), axis=0)                 # (K, P, R, N)
    partial = hist[-1]
    extrap = partial.copy()
    err = np.zeros(partial.shape)
    sel_q = cps >= c_max / 4.0
    sel_h = cps >= c_max / 2.0
    if sel_h.sum() >= 4:
        for i, p in enumerate(p_values):
            gamma = p / 2.0 - 1.5
            for j in range(R):
                for k in range(n_max):
                    y = hist[:, i, j, k]
                    b_q, rms_q = _fit_tail(cps[sel_q], y[sel_q], gamma)
                    b_h, _ = _fit_tail(cps[sel_h], y[sel_h], gamma)
                    extrap[i, j, k] = b_q
                    err[i, j, k] = abs(b_q - b_h) + 2.0 * rms_q
    else:
        err[:] = np.abs(partial) * 0 + np.inf
    return ClosedFormTable(bool(tilde), p_values, r_values, n_max, c_max, partial, extrap, err, cps, hist)


_CACHE: Dict[tuple, ClosedFormTable] = {}
_CACHE_LOCK = threading.Lock()


def _cached_table(p: int, r: float, n_max: int, c_max: int, tilde: bool) -> ClosedFormTable:
    key = (bool(tilde), int(p), float(r), int(c_max))
    with _CACHE_LOCK:
        tab = _CACHE.get(key)
    if tab is not None and tab.n_max >= n_max:
        return tab
    tab = closed_form_table([p], max(n_max, 10), [r], c_max, tilde)
    with _CACHE_LOCK:
        old = _CACHE.get(key)
        if old is None or old.n_max < tab.n_max:
            _CACHE[key] = tab
        return _CACHE[key]


def coeff_closed(p: int, n: int, r: float, tol: float = 1e-6, *, tilde: bool = False,
                 c_max: int = DEFAULT_CLOSED_CMAX, extrapolate: bool = False) -> CoefficientResult:
    """``b_{p,n}(r)`` (or ``b~_{p,n}(r)``) from the Bessel-Kloosterman expansion.

    Without ``extrapolate`` the value is the partial sum over ``c <= c_max``;
    with it, the fitted mean tail is added.  ``tail_bound`` is the rigorous
    trivial bound, ``error_estimate`` the empirical one.
    """
    if p < 5:
        raise ValueError("p must be >= 5")
    if n < 1:
        raise ValueError("closed forms are available for n >= 1 only")
    if r < 0:
        raise ValueError("r must be >= 0")
    tab = _cached_table(p, r, n, c_max, tilde)
    idx = tab.index(p, r, n)
    part = complex(tab.partial[idx])
    ext = complex(tab.extrapolated[idx])
    err = float(tab.error[idx])
    if extrapolate:
        value, est = ext, err
    else:
        value, est = part, abs(part - ext) + err
    tb = closed_tail_bound(p, n, r, c_max)
    return CoefficientResult(p, n, float(r), value, "closed_form", est, tilde=tilde, c_max=c_max,
                             tail_bound=tb, rigorous=False, flagged=est > tol,
                             note="extrapolated" if extrapolate else "partial")


__all__ += ["poincare_table", "gauss_root_exponent"]
