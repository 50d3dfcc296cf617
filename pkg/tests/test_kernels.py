"""Kernel assembly, reconstruction and the growth probe (fast profile)."""
import math

import numpy as np
import pytest

from sphere_interp.harmonics import (HarmonicGaussian, HarmonicPolynomial, QuadratureDegreeError,
                                     build_quadrature)
from sphere_interp.kernels import (CoefficientCache, KernelRequest, closed_cmax, default_m_max, interpolate,
                                   kernel_A, kernel_A_details, kernel_A_tilde, kernel_growth_probe)
from sphere_interp.results import CoefficientResult


@pytest.fixture(scope="module")
def cache():
    return CoefficientCache(profile="fast")


def test_policy():
    assert default_m_max(1, 0.5) == 49
    assert default_m_max(3, 2.0) == math.floor(47 * 4 * 3) + 2
    assert default_m_max(5, 4.0) > default_m_max(5, 2.0)
    with pytest.raises(ValueError):
        KernelRequest(5, 2, np.ones(5), m_max=3)
    KernelRequest(5, 2, np.ones(5), m_max=3, override=True)
    with pytest.raises(ValueError):
        KernelRequest(4, 1, np.ones(4))
    with pytest.raises(ValueError):
        closed_cmax(5, "huge")


def test_cache_insert_if_absent():
    c = CoefficientCache(profile="fast")
    a = CoefficientResult(6, 1, 0.5, 1 + 0j, "closed_form", 0.0)
    b = CoefficientResult(6, 1, 0.5, 2 + 0j, "closed_form", 0.0)
    assert c.insert_if_absent((6, 1, 0.5, False), a) is a
    assert c.insert_if_absent((6, 1, 0.5, False), b) is a
    assert len(c) == 1


def test_kernel_at_origin(cache):
    d, n = 5, 2
    req = KernelRequest(d, n, np.zeros(d))
    zetas = np.eye(d)
    vals = kernel_A(req, zetas, cache)
    np.testing.assert_allclose(vals, cache.get(d, n, 0.0).value, atol=1e-14)
    vt = kernel_A_tilde(req, zetas, cache)
    np.testing.assert_allclose(vt, cache.get(d, n, 0.0, True).value, atol=1e-14)


def test_kernel_rotation_invariance(cache):
    d = 5
    rng = np.random.default_rng(7)
    q, r = np.linalg.qr(rng.normal(size=(d, d)))
    Q = q * np.sign(np.diag(r))
    x = np.array([0.4, 0.1, -0.3, 0.2, 0.5])
    zeta = rng.normal(size=(4, d))
    zeta /= np.linalg.norm(zeta, axis=1, keepdims=True)
    a = kernel_A(KernelRequest(d, 2, x), zeta, cache)
    b = kernel_A(KernelRequest(d, 2, Q @ x), zeta @ Q.T, cache)
    np.testing.assert_allclose(a, b, atol=1e-10)


def test_kernel_tail_is_cauchy(cache):
    d, n = 5, 1
    x = np.zeros(d)
    x[0] = 1.0
    zeta = np.eye(d)[1]
    req = KernelRequest(d, n, x, tol=1e-12)
    det = kernel_A_details(req, zeta, cache)
    assert det.m_used < req.m_max
    assert det.tail_bound < 1e-10
    full = complex(det.value)
    partial = complex(kernel_A_details(KernelRequest(d, n, x, tol=1e-6), zeta, cache).value)
    assert abs(full - partial) < 1e-5


def _gauss(u, tau):
    return HarmonicGaussian(u, tau)


def test_interpolate_standard_gaussian(cache):
    d = 5
    quad = build_quadrature(d, 6)
    rep = interpolate(_gauss(HarmonicPolynomial.constant(d), 1j), np.eye(d)[0], 20, quad, cache)
    assert rep.residual < 1e-4
    assert rep.n_used == 20
    assert "residual" in rep.to_json()


def test_interpolate_degree_one(cache):
    d = 5
    quad = build_quadrature(d, 8)
    x = np.array([0.3, -0.5, 0.2, 0.4, 0.1])
    f = _gauss(HarmonicPolynomial.coordinate(d, 2), 0.2 + 1.1j)
    rep = interpolate(f, x, 25, quad, cache)
    assert rep.residual < 1e-4
    assert rep.extra["max_offdiagonal_term"] < 1e-12


def test_interpolate_linear(cache):
    d = 5
    quad = build_quadrature(d, 8)
    x = np.array([0.6, 0.2, -0.1, 0.0, 0.3])
    u = HarmonicPolynomial.coordinate_product(d, [0, 3])
    v = HarmonicPolynomial.coordinate_product(d, [1, 2])
    w = HarmonicPolynomial.from_dict(d, {(1, 0, 0, 1, 0): 1, (0, 1, 1, 0, 0): 1})
    tau = 1j
    a = interpolate(_gauss(u, tau), x, 10, quad, cache).f_reconstructed
    b = interpolate(_gauss(v, tau), x, 10, quad, cache).f_reconstructed
    c = interpolate(_gauss(w, tau), x, 10, quad, cache).f_reconstructed
    assert c == pytest.approx(a + b, abs=1e-12)


def test_interpolate_needs_exact_rule(cache):
    d = 5
    with pytest.raises(QuadratureDegreeError):
        interpolate(_gauss(HarmonicPolynomial.coordinate_product(d, [0, 1, 2]), 1j), np.ones(d), 3,
                    build_quadrature(d, 4), cache)


def test_growth_probe_small():
    probe = kernel_growth_probe(5, range(1, 9), n_radii=3, n_t=9)
    assert probe.exponent == pytest.approx(6.375)
    assert probe.slope <= probe.exponent + 0.2
    assert all(np.isfinite(probe.sup_A)) and min(probe.sup_A) > 0
    with pytest.raises(ValueError):
        kernel_growth_probe(5, [1, 2], annulus=(1.5, 2.0))
