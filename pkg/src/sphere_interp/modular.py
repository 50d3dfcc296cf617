"""Upper half-plane arithmetic, theta nullwerte and Gauss sums.

Everything here is a pure function of its arguments.  Complex values use
double precision; pass ``precision="mp"`` to the theta routines to get an
mpmath evaluation for oracle runs.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "HalfPlanePoint",
    "GaussSumValue",
    "ThetaTruncationError",
    "as_tau",
    "branch_power",
    "theta_nullwert",
    "theta_cocycle_power",
    "theta_multiplier",
    "gauss_sum",
    "g_small",
    "gauss_root_exponent",
    "jacobi_symbol",
    "mobius_action",
]

#: largest number of q-series terms theta_nullwert is willing to sum
THETA_TERM_CAP = 200_000


class ThetaTruncationError(ValueError):
    """Raised when Im(tau) is too small for the configured truncation cap."""


@dataclass(frozen=True)
class HalfPlanePoint:
    """A point of the upper half-plane."""

    re: float
    im: float

    def __post_init__(self):
        if not (math.isfinite(self.re) and math.isfinite(self.im)):
            raise ValueError(f"non-finite half-plane point ({self.re}, {self.im})")
        if self.im <= 0:
            raise ValueError(f"imaginary part must be positive, got {self.im}")

    @classmethod
    def from_complex(cls, z: complex) -> "HalfPlanePoint":
        z = complex(z)
        return cls(z.real, z.imag)

    def __complex__(self) -> complex:
        return complex(self.re, self.im)

    @property
    def z(self) -> complex:
        return complex(self.re, self.im)


@dataclass(frozen=True)
class GaussSumValue:
    c: int
    d: int
    value: complex


TauLike = Union[HalfPlanePoint, complex, float]


def as_tau(tau: TauLike) -> complex:
    """Coerce to a complex number in the upper half-plane (validated)."""
    if isinstance(tau, HalfPlanePoint):
        return tau.z
    z = complex(tau)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"non-finite tau {z!r}")
    if z.imag <= 0:
        raise ValueError(f"tau must lie in the upper half-plane, got {z!r}")
    return z


def branch_power(tau, k: float):
    """``(-i tau)^k`` with the branch of ``log(tau/i)`` that vanishes at ``tau = i``.

    Works on scalars and on numpy arrays of upper half-plane points.  Since
    ``-i tau`` has positive real part on the half-plane, the principal
    logarithm is the continuous branch.
    """
    if not math.isfinite(k):
        raise ValueError("exponent must be finite")
    if isinstance(tau, np.ndarray):
        t = tau.astype(complex)
        if not np.all(np.isfinite(t)):
            raise ValueError("non-finite tau")
        if np.any(t.imag <= 0):
            raise ValueError("tau must lie in the upper half-plane")
        return np.exp(k * np.log(-1j * t))
    z = as_tau(tau)
    return cmath.exp(k * cmath.log(-1j * z))


def mobius_action(a: int, b: int, c: int, d: int, tau: complex) -> complex:
    return (a * tau + b) / (c * tau + d)


def _theta_terms(q_abs: float, tol: float, half: bool) -> int:
    # sum n with pi*y*n^2 <= -log(tol*(1-|q|)) + 5; for Theta_2 use (n+1/2)^2
    if not 0 < q_abs < 1:
        raise ThetaTruncationError("need 0 < |q| < 1")
    py = -math.log(q_abs)
    budget = -math.log(tol * (1.0 - q_abs)) + 5.0
    n = math.isqrt(max(0, int(budget / py))) + 1
    if half:
        n += 1
    if n > THETA_TERM_CAP:
        raise ThetaTruncationError(
            f"Im(tau)={py / math.pi:.3g} needs {n} theta terms (cap {THETA_TERM_CAP})")
    return n


def theta_nullwert(which: str, tau: TauLike, tol: float = 1e-15, precision: str = "double"):
    """Evaluate one of the theta nullwerte ``Theta_2, Theta_3, Theta_4`` at ``tau``.

    ``which`` is one of ``"2"``, ``"3"``, ``"4"`` (``"theta2"`` etc. also accepted).
    The q-series in ``q = exp(pi i tau)`` is truncated once the geometric
    tail majorant drops below ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    key = str(which).lower().replace("theta", "").replace("θ", "").strip("_ ")
    if key not in {"2", "3", "4"}:
        raise ValueError(f"unknown theta nullwert {which!r}")
    z = as_tau(tau)
    if precision == "mp":
        return _theta_mp(key, z, tol)
    q_abs = math.exp(-math.pi * z.imag)
    N = _theta_terms(q_abs, tol, key == "2")
    n = np.arange(0, N + 1, dtype=float)
    if key == "2":
        ex = np.exp(1j * math.pi * z * (n + 0.5) ** 2)
        return complex(2.0 * ex.sum())
    ex = np.exp(1j * math.pi * z * n[1:] ** 2)
    if key == "4":
        ex = ex * np.where(n[1:] % 2 == 1, -1.0, 1.0)
    return complex(1.0 + 2.0 * ex.sum())


def _theta_mp(key: str, z: complex, tol: float):
    import mpmath as mp

    zz = mp.mpc(z.real, z.imag)
    q_abs = math.exp(-math.pi * z.imag)
    N = _theta_terms(q_abs, min(tol, 1e-30), key == "2")
    if key == "2":
        return 2 * mp.fsum(mp.exp(1j * mp.pi * zz * (n + mp.mpf(1) / 2) ** 2) for n in range(N + 1))
    sgn = -1 if key == "4" else 1
    return 1 + 2 * mp.fsum((sgn ** n) * mp.exp(1j * mp.pi * zz * n * n) for n in range(1, N + 1))


# ----------------------------------------------------------------------------
# Gauss sums
# ----------------------------------------------------------------------------

def gauss_sum(q: int, a: int) -> complex:
    """Exact finite sum ``G_q(a) = sum_{m=1}^q exp(2 pi i a m^2 / q)``."""
    q = int(q)
    if q < 1:
        raise ValueError("q must be >= 1")
    m = np.arange(1, q + 1, dtype=np.int64)
    res = (int(a) % q) * (m * m % q) % q
    return complex(np.exp(2j * np.pi * res / q).sum())


def _check_row(c: int, d: int) -> None:
    if c < 1:
        raise ValueError(f"c must be positive, got {c}")
    if math.gcd(c, d) != 1:
        raise ValueError(f"gcd({c}, {d}) != 1")


def g_small(c: int, d: int) -> GaussSumValue:
    """The Gauss sum ``g_c(d)`` of the theta transformation law, by direct summation.

    ``g_c(d) = G_{2c}(d)/2`` for even ``c`` and ``G_c(2d)`` for odd ``c``.
    """
    c, d = int(c), int(d)
    _check_row(c, d)
    if c % 2 == 0:
        val = 0.5 * gauss_sum(2 * c, d)
    else:
        val = gauss_sum(c, 2 * d)
    return GaussSumValue(c, d, val)


def jacobi_symbol(a: int, n: int) -> int:
    """Jacobi symbol ``(a/n)`` for odd positive ``n``."""
    if n <= 0 or n % 2 == 0:
        raise ValueError("n must be an odd positive integer")
    a %= n
    t = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                t = -t
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            t = -t
        a %= n
    return t if n == 1 else 0


def gauss_root_exponent(c: int, d: int) -> int:
    """Exponent ``e`` (mod 8) with ``sqrt(c)/g_c(d) = exp(i pi e / 4)``.

    Closed form through Jacobi symbols; this is what the numeric kernels use.
    ``g_small`` is the direct-summation reference.
    """
    c, d = int(c), int(d)
    _check_row(c, d)
    if c % 2 == 0:
        if d % 2 == 0:
            raise ValueError("c and d must have opposite parity")
        # G_q(a) = (1+i) eps_a^{-1} (q/a) sqrt(q) for 4 | q, a odd positive
        dd = d % (2 * c)
        e = 0 if dd % 4 == 1 else 2
        if jacobi_symbol(2 * c, dd) < 0:
            e += 4
        return (e + 7) % 8
    # c odd: G_c(a) = (a/c) eps_c sqrt(c)
    e = 0 if c % 4 == 1 else 6
    if jacobi_symbol(2 * d, c) < 0:
        e += 4
    return e % 8


def theta_cocycle_power(c: int, d: int, tau: TauLike, p: int) -> complex:
    """``j_Theta(M, tau)^{-p}`` for ``M`` in the theta group with bottom row ``(c, d)``, ``c > 0``.

    Computed as ``g_c(d)^{-p} (-i(tau + d/c))^{-p/2}``.
    """
    c, d = int(c), int(d)
    _check_row(c, d)
    if (c - d) % 2 == 0:
        raise ValueError(f"bottom row ({c}, {d}) is not in the theta group")
    z = as_tau(tau)
    g = gauss_root_exponent(c, d)
    # g_c(d)^{-p} = c^{-p/2} (sqrt(c)/g_c(d))^p
    root = cmath.exp(1j * math.pi * ((g * p) % 8) / 4.0)
    return root * c ** (-p / 2.0) * branch_power(z + d / c, -p / 2.0)


def theta_multiplier(a: int, b: int, c: int, d: int, tau: TauLike, tol: float = 1e-15) -> complex:
    """``Theta_3(M tau)/Theta_3(tau)`` evaluated directly from the q-series."""
    if a * d - b * c != 1:
        raise ValueError("matrix must have determinant 1")
    z = as_tau(tau)
    return theta_nullwert("3", mobius_action(a, b, c, d, z), tol) / theta_nullwert("3", z, tol)
