"""Zonal harmonics, sphere quadrature, harmonic polynomials and lift operators.

All integrals over ``S^{d-1}`` use the probability surface measure.
"""
from __future__ import annotations

import cmath
import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, Iterable, Optional, Tuple, Union

import numpy as np
from scipy.special import roots_jacobi

from .modular import as_tau, branch_power

__all__ = [
    "dim_harmonics",
    "ZonalKernel",
    "zonal_eval",
    "zonal_table",
    "zonal_vec",
    "SphereQuadrature",
    "build_quadrature",
    "QuadratureDegreeError",
    "HarmonicPolynomial",
    "HarmonicGaussian",
    "hecke_funk_transform",
    "lift",
    "gaussian_moment",
]


def dim_harmonics(d: int, m: int) -> int:
    """``dim H_m(R^d) = C(d+m-1, d-1) - C(d+m-3, d-1)``."""
    if d < 2 or m < 0:
        raise ValueError("need d >= 2 and m >= 0")
    hi = math.comb(d + m - 1, d - 1)
    lo = math.comb(d + m - 3, d - 1) if m >= 2 else 0
    return hi - lo


# ---------------------------------------------------------------------------
# zonal harmonics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ZonalKernel:
    d: int
    m: int

    def __post_init__(self):
        if self.d < 2 or self.m < 0:
            raise ValueError("need d >= 2 and m >= 0")

    def __call__(self, t):
        return zonal_eval(self, t)


def zonal_table(d: int, m_max: int, t) -> np.ndarray:
    """``Z_m^d(t)`` for ``m = 0..m_max``; shape ``(m_max + 1,) + shape(t)``.

    Normalized Gegenbauer recurrence
    ``R_m = (2t(m+lam-1) R_{m-1} - (m-1) R_{m-2}) / (m+2lam-1)``, ``R_m(1) = 1``,
    then ``Z_m = dim_m R_m``.  For ``d = 2``, ``Z_m = 2 T_m(t)``.
    """
    if d < 2 or m_max < 0:
        raise ValueError("need d >= 2 and m_max >= 0")
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1 + 1e-12):
        raise ValueError("|t| must be <= 1")
    t = np.clip(t, -1.0, 1.0)
    out = np.empty((m_max + 1,) + t.shape)
    out[0] = 1.0
    if m_max == 0:
        return out
    if d == 2:
        out[1] = t
        for m in range(2, m_max + 1):
            out[m] = 2 * t * out[m - 1] - out[m - 2]
        out[1:] *= 2.0
        return out
    lam = (d - 2) / 2.0
    out[1] = t
    for m in range(2, m_max + 1):
        out[m] = (2 * t * (m + lam - 1) * out[m - 1] - (m - 1) * out[m - 2]) / (m + 2 * lam - 1)
    dims = np.array([dim_harmonics(d, m) for m in range(m_max + 1)], dtype=float)
    return out * dims.reshape((-1,) + (1,) * t.ndim)


def zonal_eval(kernel: ZonalKernel, t):
    """``Z_m^d`` as a function of ``t = <zeta, omega>``."""
    val = zonal_table(kernel.d, kernel.m, t)[kernel.m]
    return float(val) if np.ndim(val) == 0 else val


def zonal_vec(d: int, m: int, x, y):
    """``Z_m^d(x, y) = |x|^m |y|^m Z_m^d(x.y / (|x||y|))`` for vectors (last axis)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    nx = np.linalg.norm(x, axis=-1)
    ny = np.linalg.norm(y, axis=-1)
    if m == 0:
        return np.ones(np.broadcast(nx, ny).shape) if np.ndim(nx) or np.ndim(ny) else 1.0
    den = nx * ny
    t = np.where(den > 0, np.sum(x * y, axis=-1) / np.where(den > 0, den, 1.0), 1.0)
    return den ** m * zonal_eval(ZonalKernel(d, m), np.clip(t, -1, 1))


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

class QuadratureDegreeError(ValueError):
    """The rule is not exact to the degree a computation relies on."""


@dataclass(frozen=True)
class SphereQuadrature:
    d: int
    nodes: np.ndarray
    weights: np.ndarray
    exact_degree: int

    def __post_init__(self):
        if self.nodes.shape != (self.weights.size, self.d):
            raise ValueError("nodes must have shape (len(weights), d)")
        if np.any(self.weights <= 0):
            raise ValueError("weights must be positive")
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def size(self) -> int:
        return self.weights.size

    def integrate(self, values) -> complex:
        """``sum_k w_k v_k``; ``values`` has the node axis first."""
        v = np.asarray(values)
        return np.tensordot(self.weights, v, axes=(0, 0))

    def require(self, degree: int):
        if degree > self.exact_degree:
            raise QuadratureDegreeError(f"need exact degree {degree}, rule has {self.exact_degree}")

    def rotated(self, Q) -> "SphereQuadrature":
        Q = np.asarray(Q, dtype=float)
        return SphereQuadrature(self.d, self.nodes @ Q.T, self.weights.copy(), self.exact_degree)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"x{i + 1}" for i in range(self.d)] + ["weight"])
        for node, wt in zip(self.nodes, self.weights):
            w.writerow([format(v, ".17g") for v in node] + [format(wt, ".17g")])
        return buf.getvalue()


@lru_cache(maxsize=32)
def _rule(d: int, exact_degree: int) -> Tuple[np.ndarray, np.ndarray]:
    npol = exact_degree // 2 + 1
    nphi = exact_degree + 1
    phi = 2 * np.pi * (np.arange(nphi) + 0.5) / nphi
    # start from the circle and prepend polar cosines from the innermost out
    nodes = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    weights = np.full(nphi, 1.0 / nphi)
    for dim in range(3, d + 1):
        a = (dim - 3) / 2.0
        t, wt = roots_jacobi(npol, a, a)
        wt = wt / wt.sum()
        s = np.sqrt(1.0 - t * t)
        nodes = np.concatenate([
            np.repeat(t, nodes.shape[0])[:, None],
            (s[:, None, None] * nodes[None, :, :]).reshape(-1, nodes.shape[1]),
        ], axis=1)
        weights = (wt[:, None] * weights[None, :]).ravel()
    return nodes, weights / weights.sum()


def build_quadrature(d: int, exact_degree: int) -> SphereQuadrature:
    """Tensor rule exact for every polynomial of total degree ``<= exact_degree`` on ``S^{d-1}``.

    Polar cosines use Gauss-Jacobi rules whose weight ``(1-t^2)^{(k-3)/2}`` is the
    surface-measure factor; the last angle uses an equispaced rule.
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    if exact_degree < 0:
        raise ValueError("exact_degree must be >= 0")
    if (exact_degree // 2 + 1) ** max(d - 2, 0) * (exact_degree + 1) > 5_000_000:
        raise QuadratureDegreeError(f"degree {exact_degree} in dimension {d} needs too many nodes")
    nodes, weights = _rule(d, exact_degree)
    return SphereQuadrature(d, nodes.copy(), weights.copy(), exact_degree)


def gaussian_moment(alpha: Iterable[int]) -> float:
    """``int_{S^{d-1}} zeta^alpha d zeta`` (probability measure), from Gamma ratios."""
    alpha = tuple(int(a) for a in alpha)
    if any(a % 2 for a in alpha):
        return 0.0
    d = len(alpha)
    k = sum(alpha)
    lg = sum(math.lgamma((a + 1) / 2.0) for a in alpha) - d * math.lgamma(0.5)
    lg += math.lgamma(d / 2.0) - math.lgamma((d + k) / 2.0)
    return math.exp(lg)


# ---------------------------------------------------------------------------
# harmonic polynomials
# ---------------------------------------------------------------------------

Number = Union[int, Fraction, float, complex]


@dataclass(frozen=True)
class HarmonicPolynomial:
    """Homogeneous polynomial on ``R^d`` as a sparse map ``exponent tuple -> coefficient``."""

    d: int
    coeffs: Tuple[Tuple[Tuple[int, ...], Number], ...]

    def __post_init__(self):
        degs = {sum(e) for e, _ in self.coeffs}
        if len(degs) > 1:
            raise ValueError("polynomial must be homogeneous")
        for e, _ in self.coeffs:
            if len(e) != self.d or any(x < 0 for x in e):
                raise ValueError("bad exponent tuple")

    @classmethod
    def from_dict(cls, d: int, mapping: Dict[Tuple[int, ...], Number], check: bool = True) -> "HarmonicPolynomial":
        items = tuple(sorted((tuple(k), v) for k, v in mapping.items() if v != 0))
        poly = cls(d, items)
        if check and not poly.is_harmonic():
            raise ValueError("polynomial is not harmonic")
        return poly

    @classmethod
    def constant(cls, d: int, value: Number = 1) -> "HarmonicPolynomial":
        return cls.from_dict(d, {(0,) * d: value})

    @classmethod
    def coordinate(cls, d: int, i: int) -> "HarmonicPolynomial":
        e = [0] * d
        e[i] = 1
        return cls.from_dict(d, {tuple(e): 1})

    @classmethod
    def coordinate_product(cls, d: int, idx: Iterable[int]) -> "HarmonicPolynomial":
        """``prod_{i in idx} x_i`` for distinct indices."""
        idx = list(idx)
        if len(set(idx)) != len(idx):
            raise ValueError("indices must be distinct")
        e = [0] * d
        for i in idx:
            e[i] = 1
        return cls.from_dict(d, {tuple(e): 1})

    @classmethod
    def complex_power(cls, d: int, m: int, i: int = 0, j: int = 1, part: str = "re") -> "HarmonicPolynomial":
        """Real or imaginary part of ``(x_i + i x_j)^m``; integer coefficients."""
        out: Dict[Tuple[int, ...], Number] = {}
        for k in range(m + 1):
            c = math.comb(m, k) * (1j) ** k
            val = c.real if part == "re" else c.imag
            val = int(round(val))
            if val:
                e = [0] * d
                e[i] += m - k
                e[j] += k
                out[tuple(e)] = out.get(tuple(e), 0) + val
        return cls.from_dict(d, out)

    @property
    def degree(self) -> int:
        return sum(self.coeffs[0][0]) if self.coeffs else 0

    def as_dict(self) -> Dict[Tuple[int, ...], Number]:
        return dict(self.coeffs)

    def derivative(self, i: int) -> "HarmonicPolynomial":
        out: Dict[Tuple[int, ...], Number] = {}
        for e, c in self.coeffs:
            if e[i]:
                f = list(e)
                f[i] -= 1
                out[tuple(f)] = out.get(tuple(f), 0) + c * e[i]
        if not out:
            return HarmonicPolynomial(self.d, ())
        return HarmonicPolynomial.from_dict(self.d, out, check=False)

    def laplacian(self) -> Dict[Tuple[int, ...], Number]:
        """Exact coefficient map of ``Delta u``; empty when harmonic."""
        out: Dict[Tuple[int, ...], Number] = {}
        for e, c in self.coeffs:
            for i in range(self.d):
                if e[i] >= 2:
                    f = list(e)
                    f[i] -= 2
                    key = tuple(f)
                    out[key] = out.get(key, 0) + c * e[i] * (e[i] - 1)
        return {k: v for k, v in out.items() if v != 0}

    def is_harmonic(self) -> bool:
        return not self.laplacian()

    def scaled(self, s: Number) -> "HarmonicPolynomial":
        return HarmonicPolynomial(self.d, tuple((e, c * s) for e, c in self.coeffs))

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.d:
            raise ValueError("last axis must have length d")
        val = np.zeros(x.shape[:-1], dtype=complex)
        for e, c in self.coeffs:
            term = np.full(x.shape[:-1], complex(c))
            for i, a in enumerate(e):
                if a:
                    term = term * x[..., i] ** a
            val = val + term
        if all(isinstance(c, (int, Fraction, float)) for _, c in self.coeffs):
            return val.real
        return val

    def inner(self, other: "HarmonicPolynomial", quad: SphereQuadrature) -> complex:
        """``<u, v> = int u conj(v)`` over the sphere, exact under the rule's degree."""
        quad.require(self.degree + other.degree)
        return complex(quad.integrate(self(quad.nodes) * np.conj(other(quad.nodes))))

    def norm(self, quad: SphereQuadrature) -> float:
        return math.sqrt(abs(self.inner(self, quad).real))

    def normalized(self, quad: SphereQuadrature) -> "HarmonicPolynomial":
        return self.scaled(1.0 / self.norm(quad))


# ---------------------------------------------------------------------------
# harmonic Gaussians and the Hecke-Funk transform
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HarmonicGaussian:
    """``f(x) = scale * u0(x) * exp(pi i tau |x|^2)``."""

    u0: HarmonicPolynomial
    tau: complex
    scale: complex = 1.0

    def __post_init__(self):
        if not self.u0.is_harmonic():
            raise ValueError("u0 must be harmonic")
        object.__setattr__(self, "tau", as_tau(self.tau))

    @property
    def d(self) -> int:
        return self.u0.d

    @property
    def m0(self) -> int:
        return self.u0.degree

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        r2 = np.sum(x * x, axis=-1)
        return self.scale * self.u0(x) * np.exp(1j * math.pi * self.tau * r2)

    def on_sphere(self, radius: float, nodes) -> np.ndarray:
        """Values at ``radius * zeta`` for unit ``zeta``: ``radius^m0 u0(zeta) e^{pi i tau radius^2}``."""
        return self.scale * radius ** self.m0 * self.u0(nodes) * cmath.exp(1j * math.pi * self.tau * radius ** 2)


def hecke_funk_transform(f: HarmonicGaussian) -> HarmonicGaussian:
    """``f^(xi) = (-i)^{m0} (-i tau)^{-(d+2m0)/2} u0(xi) exp(pi i (-1/tau) |xi|^2)``."""
    k = (f.d + 2 * f.m0) / 2.0
    pre = (-1j) ** f.m0 * branch_power(f.tau, -k)
    return HarmonicGaussian(f.u0, -1.0 / f.tau, f.scale * pre)


# ---------------------------------------------------------------------------
# lift operators
# ---------------------------------------------------------------------------

def lift(f: Union[HarmonicGaussian, Callable], u: HarmonicPolynomial, p: int, y_norm: float,
         quad: Optional[SphereQuadrature] = None) -> complex:
    """``(L_u^p f)(y) = |y|^{-m} int f(|y| zeta) conj(u(zeta)) d zeta`` as a radial function on ``R^p``.

    For a :class:`HarmonicGaussian` the value is
    ``<u0, u> e^{pi i tau |y|^2} |y|^{m0 - m}`` when ``m0 = m`` and 0 otherwise.
    A callable ``f`` is integrated numerically (needs ``y_norm > 0``).
    """
    if y_norm < 0:
        raise ValueError("y_norm must be >= 0")
    m = u.degree
    if isinstance(f, HarmonicGaussian):
        if f.m0 != m:
            return 0j
        if quad is None:
            quad = build_quadrature(f.d, 2 * m)
        ip = f.u0.inner(u, quad)
        return complex(f.scale * ip * cmath.exp(1j * math.pi * f.tau * y_norm ** 2))
    if y_norm == 0:
        raise ValueError("numeric lift needs y_norm > 0")
    if quad is None:
        raise ValueError("numeric lift needs a quadrature")
    vals = np.asarray(f(y_norm * quad.nodes)) * np.conj(u(quad.nodes))
    return complex(quad.integrate(vals)) * y_norm ** (-m)
