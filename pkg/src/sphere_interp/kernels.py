"""Interpolation kernels ``A_n``, ``A~_n`` and end-to-end reconstruction checks.

``A_n(x, zeta) = sum_m b_{d+2m,n}(|x|) Z_m(x, zeta/sqrt(n))`` and
``A~_n(x, zeta) = sum_m i^m b~_{d+2m,n}(|x|) Z_m(x, zeta/sqrt(n))``.
Coefficients come from the Bessel-Kloosterman closed forms through a shared
cache.
"""
from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .harmonics import (HarmonicGaussian, QuadratureDegreeError, SphereQuadrature, dim_harmonics,
                        hecke_funk_transform, zonal_table)
from .kloosterman import closed_form_table
from .results import CoefficientResult

__all__ = [
    "closed_cmax",
    "CoefficientCache",
    "default_m_max",
    "KernelRequest",
    "KernelValue",
    "kernel_A",
    "kernel_A_tilde",
    "kernel_A_details",
    "InterpolationReport",
    "interpolate",
    "GrowthProbe",
    "kernel_growth_probe",
]

_CMAX = {
    "fast": {5: 2000, 6: 1000, 7: 1000, 8: 600},
    "desk": {5: 16000, 6: 8000, 7: 4000, 8: 2000},
    "deep": {5: 64000, 6: 32000, 7: 16000, 8: 8000},
}
_CMAX_TAIL = {"fast": (600, 300), "desk": (1000, 400), "deep": (4000, 1600)}


def closed_cmax(p: int, profile: str = "desk") -> int:
    """Truncation in ``c`` for the closed forms; larger ``p`` converges faster."""
    if profile not in _CMAX:
        raise ValueError(f"unknown profile {profile!r}")
    if p in _CMAX[profile]:
        return _CMAX[profile][p]
    mid, hi = _CMAX_TAIL[profile]
    return mid if p < 12 else hi


class CoefficientCache:
    """Concurrent map ``(p, n, r, tilde) -> CoefficientResult`` with insert-if-absent.

    ``r`` keys are exact floats: no bucketing or interpolation.
    """

    def __init__(self, profile: str = "desk", tol: float = 1e-6, c_max: Optional[int] = None, threads: int = 1):
        closed_cmax(5, profile)
        self.profile = profile
        self.threads = max(1, int(threads))
        self.tol = tol
        self.c_max = c_max
        self._data: Dict[Tuple[int, int, float, bool], CoefficientResult] = {}
        self._lock = threading.Lock()

    def __len__(self):
        return len(self._data)

    def __contains__(self, key):
        return key in self._data

    def cmax_for(self, p: int) -> int:
        return self.c_max if self.c_max is not None else closed_cmax(p, self.profile)

    def insert_if_absent(self, key, value: CoefficientResult) -> CoefficientResult:
        with self._lock:
            return self._data.setdefault(key, value)

    def lookup(self, key) -> Optional[CoefficientResult]:
        with self._lock:
            return self._data.get(key)

    def ensure(self, p_values: Iterable[int], n_max: int, r_values: Iterable[float], tilde: bool) -> None:
        """Fill every missing ``(p, n <= n_max, r)``, grouping ``p`` by truncation."""
        r_values = sorted({float(r) for r in r_values})
        groups: Dict[int, List[int]] = {}
        for p in sorted(set(int(p) for p in p_values)):
            missing = any((p, n, r, tilde) not in self._data for n in range(1, n_max + 1) for r in r_values)
            if missing:
                groups.setdefault(self.cmax_for(p), []).append(p)
        for C, ps in groups.items():
            tab = closed_form_table(ps, n_max, r_values, C, tilde=tilde, threads=self.threads)
            for i, p in enumerate(ps):
                for j, r in enumerate(r_values):
                    for k in range(n_max):
                        err = float(tab.error[i, j, k])
                        res = CoefficientResult(p, k + 1, r, complex(tab.extrapolated[i, j, k]), "closed_form", err,
                                                tilde=tilde, c_max=C, flagged=err > self.tol, note="extrapolated")
                        self.insert_if_absent((p, k + 1, r, tilde), res)

    def get(self, p: int, n: int, r: float, tilde: bool = False) -> CoefficientResult:
        key = (int(p), int(n), float(r), bool(tilde))
        res = self.lookup(key)
        if res is None:
            self.ensure([p], max(n, 1), [r], tilde)
            res = self.lookup(key)
        return res


def default_m_max(n: int, x_norm: float) -> int:
    """``floor(47 R^2 n) + 2`` with ``R = max(1, |x|)``."""
    R = max(1.0, float(x_norm))
    return int(math.floor(47 * R * R * n)) + 2


@dataclass
class KernelRequest:
    d: int
    n: int
    x: np.ndarray
    m_max: Optional[int] = None
    tol: float = 1e-10
    override: bool = False

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        if self.d < 5:
            raise ValueError("kernels need d >= 5")
        if self.x.shape != (self.d,):
            raise ValueError("x must be a vector in R^d")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        policy = default_m_max(self.n, self.r)
        if self.m_max is None:
            self.m_max = policy
        elif self.m_max < policy and not self.override:
            raise ValueError(f"m_max {self.m_max} below policy {policy}; pass override=True")

    @property
    def r(self) -> float:
        return float(np.linalg.norm(self.x))


def _coef_bound(d: int, n: int, r: float, m: int) -> float:
    """Bound on ``|b_{d+2m,n}(r)| |x|^m n^{-m/2} dim H_m``.

    ``|b_{p,n}| <= pi (pi n)^nu zeta(nu) / Gamma(nu+1)`` with ``nu = p/2 - 1``,
    from ``|S| <= c`` and ``|J_nu(x)| <= (x/2)^nu / Gamma(nu+1)``.
    """
    nu = d / 2.0 + m - 1.0
    zeta = 1.0 + 1.0 / (nu - 1.0)
    lg = nu * math.log(math.pi * n) - math.lgamma(nu + 1.0) + (m * math.log(r) if m else 0.0) - 0.5 * m * math.log(n)
    return math.pi * zeta * dim_harmonics(d, m) * math.exp(lg)


def _m_cut(d: int, n: int, r: float, m_max: int, tol: float) -> Tuple[int, float]:
    """Smallest ``m`` after which the bounded terms are below ``tol`` and shrinking geometrically."""
    if r == 0:
        return 0, 0.0
    prev = _coef_bound(d, n, r, 0)
    for m in range(1, m_max + 1):
        cur = _coef_bound(d, n, r, m)
        rho = cur / prev if prev > 0 else 0.0
        if cur < tol and rho < 0.5:
            nxt = _coef_bound(d, n, r, m + 1)
            return m, nxt / (1.0 - min(rho, 0.5)) if m < m_max else 0.0
        prev = cur
    return m_max, 0.0


@dataclass
class KernelValue:
    value: np.ndarray
    m_used: int
    m_max: int
    tail_bound: float
    coefficient_error: float
    flagged: bool


def kernel_A_details(req: KernelRequest, zeta, cache: Optional[CoefficientCache] = None,
                     tilde: bool = False) -> KernelValue:
    """Partial ``m``-sum of the kernel at unit vectors ``zeta`` (last axis ``d``).

    The sum stops at the first ``m <= m_max`` past which the rigorous
    coefficient bound is below ``tol`` and decaying; that remainder is
    reported in ``tail_bound``.
    """
    cache = CoefficientCache() if cache is None else cache
    zeta = np.asarray(zeta, dtype=float)
    r = req.r
    m_used, tail = _m_cut(req.d, req.n, r, req.m_max, req.tol)
    ps = [req.d + 2 * m for m in range(m_used + 1)]
    cache.ensure(ps, req.n, [r], tilde)
    if r > 0:
        t = np.clip(zeta @ (req.x / r), -1.0, 1.0)
    else:
        t = np.zeros(zeta.shape[:-1])
    Z = zonal_table(req.d, m_used, t)
    total = np.zeros(t.shape, dtype=complex)
    cerr = 0.0
    flagged = False
    for m in range(m_used + 1):
        res = cache.get(req.d + 2 * m, req.n, r, tilde)
        scale = (r ** m if m else 1.0) * req.n ** (-0.5 * m) * ((1j) ** m if tilde else 1.0)
        total = total + res.value * scale * Z[m]
        cerr += res.error_estimate * abs(scale) * dim_harmonics(req.d, m)
        flagged |= res.flagged
    flagged |= tail > req.tol
    return KernelValue(total, m_used, req.m_max, tail, cerr, flagged)


def kernel_A(req: KernelRequest, zeta, cache: Optional[CoefficientCache] = None):
    v = kernel_A_details(req, zeta, cache, tilde=False).value
    return complex(v) if v.ndim == 0 else v


def kernel_A_tilde(req: KernelRequest, zeta, cache: Optional[CoefficientCache] = None):
    v = kernel_A_details(req, zeta, cache, tilde=True).value
    return complex(v) if v.ndim == 0 else v


# ---------------------------------------------------------------------------
# reconstruction
# ---------------------------------------------------------------------------

@dataclass
class InterpolationReport:
    x: np.ndarray
    f_true: complex
    f_reconstructed: complex
    residual: float
    n_used: int
    per_n_contributions: List[complex]
    extra: dict = field(default_factory=dict)

    def to_json(self) -> str:
        def cplx(z):
            return [float(np.real(z)), float(np.imag(z))]

        doc = {
            "x": [float(v) for v in self.x],
            "f_true": cplx(self.f_true),
            "f_reconstructed": cplx(self.f_reconstructed),
            "residual": float(self.residual),
            "n_used": int(self.n_used),
            "per_n_abs": [float(abs(c)) for c in self.per_n_contributions],
            "truncations": {k: v for k, v in self.extra.items() if isinstance(v, (int, float, str, bool))},
        }
        return json.dumps(doc, indent=2, sort_keys=True)


def interpolate(f: HarmonicGaussian, x, n_max: int, quad: SphereQuadrature,
                cache: Optional[CoefficientCache] = None, m_max: Optional[int] = None) -> InterpolationReport:
    """Evaluate ``sum_n int A_n f(sqrt n zeta) + sum_n int A~_n f^(sqrt n zeta)`` at ``x``.

    Each ``m`` term is integrated separately with the quadrature (outermost).
    For ``m <= exact_degree - m0`` the rule is exact, so the orthogonality
    collapse happens numerically; for larger ``m`` up to the ``m_max`` policy
    the term is the exact value 0, because ``f`` restricted to each sphere is a
    harmonic of degree ``m0``.
    """
    cache = CoefficientCache() if cache is None else cache
    d = f.d
    if d < 5:
        raise ValueError("reconstruction needs d >= 5")
    if quad.d != d:
        raise ValueError("quadrature dimension mismatch")
    x = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(x))
    m0 = f.m0
    m_quad = quad.exact_degree - m0
    if m_quad < m0:
        raise QuadratureDegreeError(f"rule of degree {quad.exact_degree} cannot separate degree {m0}")
    if r == 0:
        m_quad = 0
    xhat = x / r if r > 0 else np.eye(d)[0]
    fh = hecke_funk_transform(f)
    Z = zonal_table(d, m_quad, np.clip(quad.nodes @ xhat, -1.0, 1.0))                # (M, N)
    ps = [d + 2 * m for m in range(m_quad + 1)]
    cache.ensure(ps, n_max, [r], False)
    cache.ensure(ps, n_max, [r], True)

    contributions: List[complex] = []
    off_diag = 0.0
    cerr = 0.0
    flagged = False
    m_policy = []
    for n in range(1, n_max + 1):
        mm = default_m_max(n, r) if m_max is None else m_max
        m_policy.append(mm)
        mq = min(m_quad, mm)
        sq = math.sqrt(n)
        Q = Z[: mq + 1] @ (quad.weights * f.on_sphere(sq, quad.nodes))
        Qt = Z[: mq + 1] @ (quad.weights * fh.on_sphere(sq, quad.nodes))
        acc = 0j
        for m in range(mq + 1):
            scale = (r ** m if m else 1.0) * n ** (-0.5 * m)
            b = cache.get(d + 2 * m, n, r, False)
            bt = cache.get(d + 2 * m, n, r, True)
            term = b.value * scale * Q[m] + (1j) ** m * bt.value * scale * Qt[m]
            if m != m0:
                off_diag = max(off_diag, abs(b.value * scale * Q[m]), abs(bt.value * scale * Qt[m]))
            acc += term
            cerr += (b.error_estimate * abs(Q[m]) + bt.error_estimate * abs(Qt[m])) * abs(scale)
            flagged |= b.flagged or bt.flagged
        # m in (mq, mm]: exact orthogonality, contributes 0
        contributions.append(complex(acc))
    f_true = complex(np.asarray(f(x)))
    recon = complex(sum(contributions))
    extra = {
        "m_max_policy_last": m_policy[-1],
        "m_quadrature": m_quad,
        "exact_degree": quad.exact_degree,
        "max_offdiagonal_term": off_diag,
        "coefficient_error": cerr,
        "flagged": bool(flagged),
        "profile": cache.profile,
    }
    return InterpolationReport(x, f_true, recon, abs(f_true - recon), n_max, contributions, extra)


# ---------------------------------------------------------------------------
# growth probe
# ---------------------------------------------------------------------------

@dataclass
class GrowthProbe:
    d: int
    n_values: List[int]
    sup_A: List[float]
    sup_A_tilde: List[float]
    exponent: float
    slope: float
    constant: float

    def rows(self):
        return list(zip(self.n_values, self.sup_A, self.sup_A_tilde))


def kernel_growth_probe(d: int, n_range: Sequence[int], annulus: Tuple[float, float] = (0.5, 2.0),
                        n_radii: int = 5, n_t: int = 33, cache: Optional[CoefficientCache] = None,
                        tol: float = 1e-8) -> GrowthProbe:
    """Sample ``sup |A_n|``, ``sup |A~_n|`` over ``delta <= |x| <= R`` and the sphere.

    By rotation invariance the kernels depend only on ``|x|`` and ``t = x.zeta/|x|``,
    so a grid in ``(|x|, t)`` covers the annulus times the sphere.  The slope is a
    least-squares fit of ``log sup`` against ``log n``; ``constant`` is the
    largest ``sup / n^{5d/4 + 1/8}``.
    """
    delta, R = annulus
    if not (0 < delta <= 1 <= R):
        raise ValueError("need 0 < delta <= 1 <= R")
    cache = CoefficientCache(profile="fast") if cache is None else cache
    radii = np.linspace(delta, R, n_radii)
    ts = np.linspace(-1.0, 1.0, n_t)
    n_values = [int(n) for n in n_range]
    # one pass over c for every radius at once
    m_top = max(_m_cut(d, n, float(rho), default_m_max(n, rho), tol)[0] for n in n_values for rho in radii)
    for tl in (False, True):
        cache.ensure([d + 2 * m for m in range(m_top + 1)], max(n_values), [float(v) for v in radii], tl)
    supA, supAt = [], []
    for n in n_values:
        a = at = 0.0
        for rho in radii:
            x = np.zeros(d)
            x[0] = float(rho)
            zeta = np.stack([ts, np.sqrt(1 - ts * ts)] + [np.zeros_like(ts)] * (d - 2), axis=1)
            req = KernelRequest(d, n, x, tol=tol)
            a = max(a, float(np.max(np.abs(kernel_A_details(req, zeta, cache).value))))
            at = max(at, float(np.max(np.abs(kernel_A_details(req, zeta, cache, tilde=True).value))))
        supA.append(a)
        supAt.append(at)
    expo = 5 * d / 4 + 1 / 8
    ln = np.log(n_values)
    sup = np.maximum(supA, supAt)
    slope = float(np.polyfit(ln, np.log(sup), 1)[0]) if len(n_values) > 1 else float("nan")
    const = float(np.max(sup / np.asarray(n_values, dtype=float) ** expo))
    return GrowthProbe(d, n_values, supA, supAt, expo, slope, const)
