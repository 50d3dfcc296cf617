"""The generating series ``F_p``, ``F~_p`` and contour extraction of their coefficients.

``F_p(tau, r) = -sum_{M in BSET} j(M,tau)^{-p} exp(pi i r^2 M tau)`` and
``F~_p`` is the same sum over ``BSET_TILDE`` with sign ``+``.  Rows are taken
from :mod:`words`; ``M tau = alpha/c - 1/(c (c tau + d))``.

Two truncations are used:

* a box ``0 < c <= c_max``, ``|d| <= d_halfwidth`` for point evaluation
  (:func:`eval_F`), with a rigorous tail bound;
* all ``d`` for each ``c <= c_max`` (the ``d``-sum done exactly by the
  compiled periodized kernel) for Fourier extraction (:func:`coeff_contour`).
  Each such partial sum is 2-periodic with only positive Fourier modes.
"""
from __future__ import annotations

import cmath
import json
import math
import os
import threading
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Dict, Optional, Tuple

import numpy as np

from . import _backend
from .kloosterman import closed_form_table
from .modular import as_tau, branch_power
from .results import CoefficientResult

__all__ = [
    "SeriesTruncation",
    "SeriesValue",
    "default_truncation",
    "eval_F",
    "eval_F_tilde",
    "functional_equation_residual",
    "u_sum",
    "tail_envelope",
    "calibrate_tail_constant",
    "coeff_contour",
    "radial_residual",
    "RadialReport",
    "Y_FLOOR",
]

Y_FLOOR = 0.05
_DATA = os.path.join(os.path.dirname(__file__), "data", "calibration.json")


# ---------------------------------------------------------------------------
# truncation boxes and rows
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SeriesTruncation:
    """Box ``0 < c <= c_max``, ``|d| <= d_halfwidth``.

    ``tail_bound`` is filled in by the evaluators for the point at hand; it
    bounds the absolute sum of every omitted term.
    """

    c_max: int
    d_halfwidth: int
    tail_bound: float = math.inf

    def __post_init__(self):
        if self.c_max < 1 or self.d_halfwidth < 1:
            raise ValueError("c_max and d_halfwidth must be >= 1")

    def dual(self) -> "SeriesTruncation":
        """The box matched under ``(c, d) -> (d, -c)``, i.e. right multiplication by ``S``."""
        return SeriesTruncation(self.d_halfwidth, self.c_max)


def default_truncation(c_max: int, tau=None) -> SeriesTruncation:
    x = 0.0 if tau is None else abs(as_tau(tau).real)
    return SeriesTruncation(c_max, max(3 * c_max, math.ceil(c_max * (1 + x)) + 10))


@dataclass(frozen=True)
class SeriesValue:
    value: complex
    tail_bound: float
    truncation: SeriesTruncation
    flagged: bool
    n_terms: int

    def __complex__(self):
        return self.value


@lru_cache(maxsize=64)
def _residues(parity: int, c_max: int):
    """Concatenated residue rows ``(c, d0, alpha, e)`` for every ``c <= c_max`` of the parity."""
    cs, ds, als, es = [], [], [], []
    for c in range(2 - parity, c_max + 1, 2):
        d0, a, e = _backend.row_data(parity, c)
        cs.append(np.full(d0.shape, c, dtype=np.int64))
        ds.append(d0)
        als.append(a)
        es.append(e)
    if not cs:
        z = np.zeros(0, dtype=np.int64)
        return z, z, z, z
    return tuple(np.ascontiguousarray(np.concatenate(x)) for x in (cs, ds, als, es))


@lru_cache(maxsize=64)
def _box_rows(parity: int, c_max: int, d_halfwidth: int):
    """Every row of the box, built by shifting residues by multiples of ``2c``."""
    c, d0, al, e = _residues(parity, c_max)
    out = [[], [], [], []]
    for i in range(c.size):
        cc = int(c[i])
        lo = -((d_halfwidth + int(d0[i])) // (2 * cc))
        hi = (d_halfwidth - int(d0[i])) // (2 * cc)
        if hi < lo:
            continue
        d = int(d0[i]) + 2 * cc * np.arange(lo, hi + 1, dtype=np.int64)
        out[0].append(np.full(d.shape, cc, dtype=np.int64))
        out[1].append(d)
        out[2].append(np.full(d.shape, al[i], dtype=np.int64))
        out[3].append(np.full(d.shape, e[i], dtype=np.int64))
    if not out[0]:
        z = np.zeros(0, dtype=np.int64)
        return z, z, z, z
    arrs = [np.concatenate(x) for x in out]
    order = np.lexsort((arrs[1], arrs[0]))
    return tuple(np.ascontiguousarray(a[order]) for a in arrs)


def _box_tail(k: float, tau: complex, trunc: SeriesTruncation, r2: complex) -> float:
    """Rigorous bound for ``sum |c tau + d|^{-k} |exp(pi i r^2 M tau)|`` over rows outside the box."""
    x, y = abs(tau.real), tau.imag
    C, D = trunc.c_max, trunc.d_halfwidth
    if r2.imag == 0 and r2.real >= 0:
        amp = 1.0
    else:
        amp = math.exp(math.pi * abs(r2) * (1.0 + 1.0 / (y * y)))
    # c > C: per c, sum_d f(cx + d) <= max f + integral, f(t) = (t^2 + (cy)^2)^{-k/2}
    Kk = math.sqrt(math.pi) * math.exp(math.lgamma((k - 1) / 2) - math.lgamma(k / 2))
    big_c = y ** (-k) * (C ** (-k) + C ** (1 - k) / (k - 1)) \
        + Kk * y ** (1 - k) * (C ** (1 - k) + C ** (2 - k) / (k - 2))
    # c <= C, |d| > D: |cx + d| >= |d| - C x
    m0 = D + 1 - C * x
    if m0 <= 1:
        return math.inf
    side = m0 ** (-k) + m0 ** (1 - k) / (k - 1)
    return amp * (big_c + 2.0 * C * side)


def _eval(parity: int, sign: float, p: int, tau, r, trunc: Optional[SeriesTruncation], tol: float,
          y_floor: float) -> SeriesValue:
    if p < 5:
        raise ValueError("p must be >= 5")
    z = as_tau(tau)
    if z.imag < y_floor:
        raise ValueError(f"Im(tau) = {z.imag} is below the floor {y_floor}")
    if trunc is None:
        trunc = default_truncation(40, z)
    r2 = complex(r) ** 2
    c, d, al, e = _box_rows(parity, trunc.c_max, trunc.d_halfwidth)
    val = sign * _backend.box_sum(c, d, al, e, int(p), r2, z)
    tb = _box_tail(p / 2.0, z, trunc, r2)
    tr = replace(trunc, tail_bound=tb)
    return SeriesValue(complex(val), tb, tr, tb > tol, int(c.size))


def eval_F(p: int, tau, r, trunc: Optional[SeriesTruncation] = None, tol: float = 1e-6,
           y_floor: float = Y_FLOOR) -> SeriesValue:
    """Box-truncated ``F_p(tau, r)``."""
    return _eval(0, -1.0, p, tau, r, trunc, tol, y_floor)


def eval_F_tilde(p: int, tau, r, trunc: Optional[SeriesTruncation] = None, tol: float = 1e-6,
                 y_floor: float = Y_FLOOR) -> SeriesValue:
    """Box-truncated ``F~_p(tau, r)``; the row ``(1, 0)`` is the class of ``S``."""
    return _eval(1, 1.0, p, tau, r, trunc, tol, y_floor)


def functional_equation_residual(p: int, tau, r, trunc: Optional[SeriesTruncation] = None) -> Tuple[float, float]:
    """``|F(tau) + (-i tau)^{-p/2} F~(-1/tau) - exp(pi i r^2 tau)|`` with matched boxes.

    Returns ``(residual, combined tail bound)``.  The tilde box is the dual of
    the untilded one, so the omitted terms correspond one to one.
    """
    z = as_tau(tau)
    if trunc is None:
        trunc = default_truncation(40, z)
    f = eval_F(p, z, r, trunc, y_floor=0.0 + 1e-300)
    ft = eval_F_tilde(p, -1.0 / z, r, trunc.dual(), y_floor=1e-300)
    w = branch_power(z, -p / 2.0)
    res = abs(f.value + w * ft.value - cmath.exp(1j * math.pi * complex(r) ** 2 * z))
    return res, f.tail_bound + abs(w) * ft.tail_bound


# ---------------------------------------------------------------------------
# majorant U_k and the tail envelope
# ---------------------------------------------------------------------------

def u_sum(k: float, tau, tilde: bool = False, c_box: int = 500, upper: bool = True) -> float:
    """``U_k(tau) = sum_{M} |c_M tau + d_M|^{-k}`` over ``BSET`` (or ``BSET_TILDE``).

    Exact over ``c <= c_box`` with ``|d|`` up to ``4 c_box`` plus, if
    ``upper``, the rigorous bound for everything omitted.
    """
    z = as_tau(tau)
    x, y = z.real, z.imag
    parity = 1 if tilde else 0
    D = 4 * c_box + int(c_box * abs(x)) + 10
    total = 0.0
    for c in range(2 - parity, c_box + 1, 2):
        d = np.arange(-D, D + 1, dtype=np.int64)
        d = d[(d - c) % 2 == 1]
        d = d[np.gcd(d, c) == 1]
        total += float(np.sum(((c * x + d) ** 2 + (c * y) ** 2) ** (-k / 2.0)))
    if upper:
        total += _box_tail(k, z, SeriesTruncation(c_box, D), 0j)
    return total


def _load_c0() -> float:
    try:
        with open(_DATA) as fh:
            return float(json.load(fh)["tail_envelope_C0"])
    except (OSError, KeyError, ValueError):
        return 1.0


_C0 = None
_C0_LOCK = threading.Lock()


def tail_constant() -> float:
    global _C0
    with _C0_LOCK:
        if _C0 is None:
            _C0 = _load_c0()
        return _C0


def tail_envelope(k: float, y0: float, eps: float) -> float:
    """``C0 eps^{-2} (y0^{-k} + y0^{-k/2})``, a majorant of ``max(U_k, U~_k)`` on ``Im tau = y0``.

    ``C0`` is calibrated by :func:`calibrate_tail_constant`; this envelope is a
    heuristic for step sizes and sanity checks, not an error bound.
    """
    if not (0 < eps <= 0.125):
        raise ValueError("eps must lie in (0, 1/8]")
    if k < 2 + 2 * eps:
        raise ValueError("need k >= 2 + 2 eps")
    if y0 <= 0:
        raise ValueError("y0 must be positive")
    return tail_constant() * eps ** -2 * (y0 ** -k + y0 ** (-k / 2))


def calibrate_tail_constant(ks=(2.25, 2.5, 3.0, 4.0, 5.0, 6.0), ys=(0.1, 0.25, 0.5, 1.0, 2.0, 4.0),
                            xs=(-1.0, -0.5, 0.0, 0.5, 1.0), c_box: int = 120) -> Dict[str, float]:
    """Largest ratio ``max(U, U~)/(eps^{-2}(y^{-k} + y^{-k/2}))`` over a grid, with rigorous upper U."""
    worst = 0.0
    arg = None
    for k in ks:
        eps = min(0.125, (k - 2) / 2)
        for y in ys:
            shape = eps ** -2 * (y ** -k + y ** (-k / 2))
            for x in xs:
                u = max(u_sum(k, complex(x, y), False, c_box), u_sum(k, complex(x, y), True, c_box))
                if u / shape > worst:
                    worst, arg = u / shape, (k, y, x)
    return {"tail_envelope_C0": 1.05 * worst, "argmax_k": arg[0], "argmax_y": arg[1], "argmax_x": arg[2]}


# ---------------------------------------------------------------------------
# contour extraction
# ---------------------------------------------------------------------------

def _height(p: int, n: int, y_floor: float) -> float:
    if n >= 1:
        return max(p / (2 * math.pi * n), y_floor)
    return 1.0


def _periodic_tail(k: float, y: float, C: int) -> float:
    # all rows with c > C, every d: rigorous, see _box_tail
    Kk = math.sqrt(math.pi) * math.exp(math.lgamma((k - 1) / 2) - math.lgamma(k / 2))
    return y ** (-k) * (C ** (-k) + C ** (1 - k) / (k - 1)) \
        + Kk * y ** (1 - k) * (C ** (1 - k) + C ** (2 - k) / (k - 2))


def series_at_nodes(p: int, r: float, nodes: np.ndarray, c_max: int, tilde: bool = False) -> np.ndarray:
    """``F_p`` (or ``F~_p``) truncated to ``c <= c_max`` with every ``d``, at the given nodes."""
    parity = 1 if tilde else 0
    c, d0, al, e = _residues(parity, c_max)
    sign = 1.0 if tilde else -1.0
    return sign * _backend.periodized_sum(c, d0, al, e, int(p), float(r) ** 2,
                                          np.ascontiguousarray(nodes, dtype=complex))


DEFAULT_CONTOUR_CMAX = 48
#: relative accuracy of the periodized kernel (window plus Euler-Maclaurin tail), against mpmath
KERNEL_REL = 1e-13
#: same, relative to the absolute row sums (the l-sums cancel heavily for large r)
KERNEL_ABS = 1e-14


def _row_majorant(k: float, y: float, C: int, tilde: bool) -> float:
    """``sum_c c * c^{-k} * sup_w sum_l |w + 2l|^{-k}`` on ``Im w = y``."""
    per_row = 2.0 * y ** (-k) + 2.0 + 1.0 / (k - 1.0)
    cs = np.arange(1 if tilde else 2, C + 1, 2, dtype=float)
    return per_row * float(np.sum(cs ** (1.0 - k)))


def coeff_contour(p: int, n: int, r: float, tol: float = 1e-8, *, tilde: bool = False,
                  c_max: int = DEFAULT_CONTOUR_CMAX, y_floor: float = Y_FLOOR, y0: Optional[float] = None,
                  max_nodes: int = 2 ** 14, min_nodes: int = 16, tail_estimate: bool = True) -> CoefficientResult:
    """``(1/2) int_{i y0 + [-1, 1]} F_p(tau, r) exp(-pi i n tau) d tau`` by the trapezoid rule.

    The node count doubles until two successive rules differ by less than
    ``tol/2``.  The series is truncated to ``c <= c_max`` (all ``d``); the
    effect of that truncation is estimated from the closed-form partial sums
    at ``c_max`` and reported in ``extra["c_tail"]``.
    """
    if p < 5:
        raise ValueError("p must be >= 5")
    if r < 0:
        raise ValueError("r must be >= 0")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if y0 is None:
        y0 = _height(p, n, y_floor)
    N = min_nodes
    x = -1.0 + 2.0 * np.arange(N) / N
    vals = series_at_nodes(p, r, x + 1j * y0, c_max, tilde) * np.exp(-1j * math.pi * n * (x + 1j * y0))
    acc = np.sum(vals)
    peak = float(np.max(np.abs(vals)))
    prev = acc / N
    diff = math.inf
    converged = False
    while 2 * N <= max_nodes:
        xn = -1.0 + 2.0 * (np.arange(N) + 0.5) / N
        vn = series_at_nodes(p, r, xn + 1j * y0, c_max, tilde) * np.exp(-1j * math.pi * n * (xn + 1j * y0))
        acc = acc + np.sum(vn)
        peak = max(peak, float(np.max(np.abs(vn))))
        N *= 2
        cur = acc / N
        diff = abs(cur - prev)
        prev = cur
        if diff < tol / 2:
            converged = True
            break
    value = complex(prev)
    c_tail = 0.0
    if tail_estimate and n >= 1:
        tab = closed_form_table([p], n, [r], c_max, tilde=tilde)
        idx = tab.index(p, r, n)
        c_tail = float(abs(tab.partial[idx] - tab.extrapolated[idx]) + tab.error[idx])
    rig = _periodic_tail(p / 2.0, y0, c_max) * math.exp(math.pi * n * y0)
    kern = KERNEL_REL * peak + KERNEL_ABS * _row_majorant(p / 2.0, y0, c_max, tilde) * math.exp(math.pi * n * y0)
    err = diff + c_tail + kern
    note = "" if converged else "quadrature not converged"
    if n <= 0:
        note = (note + "; " if note else "") + "vanishing"
    return CoefficientResult(p, n, float(r), value, "contour", err, tilde=tilde, c_max=c_max,
                             tail_bound=rig, rigorous=False, flagged=(not converged) or err > tol,
                             note=note, extra={"y0": y0, "nodes": N, "quad_diff": diff, "c_tail": c_tail,
                                                    "kernel": kern})


# ---------------------------------------------------------------------------
# radial interpolation check
# ---------------------------------------------------------------------------

@dataclass
class RadialReport:
    p: int
    tau: complex
    r: float
    n_max: int
    residual: float
    coefficient_error: float
    flagged: bool


RADIAL_CMAX = 16000


def radial_residual(p: int, tau, r: float, n_max: int, c_max: int = RADIAL_CMAX,
                    tables=None, report: bool = False):
    """``|e^{pi i tau r^2} - sum_n b_n(r) e^{pi i tau n} - (-i tau)^{-p/2} sum_n b~_n(r) e^{-pi i n/tau}|``.

    Coefficients come from extrapolated closed-form tables (computed here
    unless ``tables = (table, tilde_table)`` is passed).
    """
    z = as_tau(tau)
    if tables is None:
        tables = (closed_form_table([p], n_max, [r], c_max, tilde=False),
                  closed_form_table([p], n_max, [r], c_max, tilde=True))
    tab, ttab = tables
    i, j, _ = tab.index(p, r, 1)
    it, jt, _ = ttab.index(p, r, 1)
    b = tab.extrapolated[i, j, :n_max]
    bt = ttab.extrapolated[it, jt, :n_max]
    eb = tab.error[i, j, :n_max]
    ebt = ttab.error[it, jt, :n_max]
    nn = np.arange(1, n_max + 1)
    q = np.exp(1j * math.pi * z * nn)
    qt = np.exp(-1j * math.pi * nn / z)
    w = branch_power(z, -p / 2.0)
    recon = np.sum(b * q) + w * np.sum(bt * qt)
    res = abs(cmath.exp(1j * math.pi * z * r * r) - recon)
    cerr = float(np.sum(eb * np.abs(q)) + abs(w) * np.sum(ebt * np.abs(qt)))
    if report:
        return RadialReport(p, z, float(r), n_max, float(res), cerr, bool(cerr > 1e-6))
    return float(res)
