"""Zonal harmonics, sphere quadrature, harmonic Gaussians and lifts."""
import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sphere_interp.harmonics import (HarmonicGaussian, HarmonicPolynomial, QuadratureDegreeError, ZonalKernel,
                                     build_quadrature, dim_harmonics, gaussian_moment, hecke_funk_transform, lift,
                                     zonal_eval, zonal_table, zonal_vec)


def _random_rotation(rng, d):
    q, r = np.linalg.qr(rng.normal(size=(d, d)))
    return q * np.sign(np.diag(r))


def test_dim_examples():
    assert dim_harmonics(7, 0) == 1
    assert dim_harmonics(7, 1) == 7
    assert dim_harmonics(3, 2) == 5
    assert [dim_harmonics(2, m) for m in range(4)] == [1, 2, 2, 2]
    with pytest.raises(ValueError):
        dim_harmonics(1, 0)


@given(st.integers(2, 8), st.integers(0, 12), st.floats(-1, 1))
def test_zonal_basic(d, m, t):
    assert zonal_eval(ZonalKernel(d, 0), t) == 1.0
    assert zonal_eval(ZonalKernel(d, m), 1.0) == pytest.approx(dim_harmonics(d, m), rel=1e-12)
    assert abs(zonal_eval(ZonalKernel(d, m), t)) <= dim_harmonics(d, m) * (1 + 1e-12)


def test_zonal_rejects_out_of_range():
    with pytest.raises(ValueError):
        zonal_table(5, 3, 1.5)


def test_zonal_reproducing():
    d, m = 5, 3
    quad = build_quadrature(d, 6)
    rng = np.random.default_rng(1)
    omega = rng.normal(size=d)
    omega /= np.linalg.norm(omega)
    u = HarmonicPolynomial.coordinate_product(d, [0, 2, 4])
    Z = zonal_vec(d, m, quad.nodes, omega)
    assert quad.integrate(u(quad.nodes) * Z) == pytest.approx(u(omega), abs=1e-10)


def test_quadrature_examples():
    d = 5
    quad = build_quadrature(d, 4)
    assert quad.integrate(np.ones(quad.size)) == pytest.approx(1.0, abs=1e-15)
    second = np.array([[quad.integrate(quad.nodes[:, i] * quad.nodes[:, j]) for j in range(d)] for i in range(d)])
    np.testing.assert_allclose(second, np.eye(d) / d, atol=1e-15)
    assert quad.integrate(quad.nodes[:, 0] ** 4) == pytest.approx(3 / 35, abs=1e-15)
    assert gaussian_moment((4, 0, 0, 0, 0)) == pytest.approx(3 / 35, abs=1e-16)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_quadrature_moment_exactness(d):
    deg = 7
    quad = build_quadrature(d, deg)
    for alpha in itertools.product(range(deg + 1), repeat=d):
        if sum(alpha) <= deg:
            v = quad.integrate(np.prod(quad.nodes ** np.array(alpha), axis=1))
            assert abs(v - gaussian_moment(alpha)) < 1e-13


def test_quadrature_degree_enforced():
    quad = build_quadrature(5, 4)
    quad.require(4)
    with pytest.raises(QuadratureDegreeError):
        quad.require(5)
    with pytest.raises(QuadratureDegreeError):
        build_quadrature(9, 400)
    assert not quad.nodes.flags.writeable


def test_quadrature_rotation_and_csv():
    rng = np.random.default_rng(3)
    quad = build_quadrature(4, 6)
    Q = _random_rotation(rng, 4)
    rq = quad.rotated(Q)
    f = lambda x: x[:, 0] ** 2 * x[:, 1] ** 4
    assert rq.integrate(f(rq.nodes)) == pytest.approx(quad.integrate(f(quad.nodes)), abs=1e-14)
    assert quad.to_csv().splitlines()[0] == "x1,x2,x3,x4,weight"


def test_harmonic_polynomials():
    d = 5
    u = HarmonicPolynomial.complex_power(d, 3, 1, 3)
    assert u.is_harmonic() and u.degree == 3
    with pytest.raises(ValueError):
        HarmonicPolynomial.from_dict(d, {(2, 0, 0, 0, 0): 1})
    with pytest.raises(ValueError):
        HarmonicPolynomial.coordinate_product(d, [1, 1])
    quad = build_quadrature(d, 8)
    v = u.normalized(quad)
    assert v.norm(quad) == pytest.approx(1.0, abs=1e-13)
    # different degrees are orthogonal
    assert abs(u.inner(HarmonicPolynomial.coordinate(d, 0), quad)) < 1e-15


def test_hecke_funk_examples():
    d = 5
    g = HarmonicGaussian(HarmonicPolynomial.constant(d), 1j)
    gh = hecke_funk_transform(g)
    x = np.array([0.3, -0.2, 0.5, 0.1, 0.7])
    assert gh(x) == pytest.approx(g(x), abs=1e-15)
    f = HarmonicGaussian(HarmonicPolynomial.coordinate(d, 1), 2j)
    fh = hecke_funk_transform(f)
    assert fh.scale == pytest.approx(-1j * 2 ** -3.5, abs=1e-15)
    f2 = HarmonicGaussian(HarmonicPolynomial.coordinate_product(d, [0, 1]), 1j)
    twice = hecke_funk_transform(hecke_funk_transform(f2))
    assert twice(x) == pytest.approx(f2(x), abs=1e-14)


def test_lift_examples():
    d = 5
    quad = build_quadrature(d, 8)
    u = HarmonicPolynomial.coordinate_product(d, [0, 1]).normalized(quad)
    tau = 0.2 + 1.1j
    f = HarmonicGaussian(u, tau)
    for y in (0.0, 0.5, 1.2):
        assert lift(f, u, d + 4, y, quad) == pytest.approx(np.exp(1j * math.pi * tau * y * y), abs=1e-13)
    assert lift(f, HarmonicPolynomial.coordinate(d, 0), d + 2, 0.7, quad) == 0
    num = lift(lambda X: f(X), u, d + 4, 0.7, quad)
    assert num == pytest.approx(np.exp(1j * math.pi * tau * 0.49), abs=1e-13)
    with pytest.raises(ValueError):
        lift(lambda X: f(X), u, d + 4, 0.0, quad)
