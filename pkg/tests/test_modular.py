"""Half-plane arithmetic, theta nullwerte and Gauss sums."""
import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sphere_interp.modular import (HalfPlanePoint, ThetaTruncationError, as_tau, branch_power, g_small,
                                   gauss_root_exponent, gauss_sum, jacobi_symbol, theta_cocycle_power,
                                   theta_multiplier, theta_nullwert)

# mpmath jtheta at 30 digits
THETA3_I = 1.0864348112133080146
THETA2_I = 0.91357913815611682141

taus = st.builds(complex, st.floats(-3, 3), st.floats(0.3, 3))


def test_half_plane_point_rejects_lower_half():
    with pytest.raises(ValueError):
        HalfPlanePoint(0.0, 0.0)
    with pytest.raises(ValueError):
        HalfPlanePoint(float("nan"), 1.0)
    with pytest.raises(ValueError):
        as_tau(1 - 1j)
    assert complex(HalfPlanePoint.from_complex(0.5 + 2j)) == 0.5 + 2j


def test_branch_power_examples():
    assert branch_power(1j, 7.5) == pytest.approx(1.0, abs=1e-15)
    assert branch_power(2j, 0.5) == pytest.approx(math.sqrt(2), abs=1e-15)
    w = branch_power(1 + 1j, 0.5)
    assert w.real > 0
    assert w * w == pytest.approx(1 - 1j, abs=1e-15)
    with pytest.raises(ValueError):
        branch_power(1j, float("inf"))


@given(taus, st.floats(-6, 6))
def test_branch_power_multiplicative(tau, k):
    a = branch_power(tau, k) * branch_power(tau, 0.5)
    assert a == pytest.approx(branch_power(tau, k + 0.5), rel=1e-12)


def test_branch_power_vectorized():
    t = np.array([1j, 0.3 + 0.7j, -2 + 0.1j])
    np.testing.assert_allclose(branch_power(t, -2.5), [branch_power(z, -2.5) for z in t], rtol=1e-14)


def test_theta_values():
    assert theta_nullwert("3", 1j).real == pytest.approx(THETA3_I, abs=1e-14)
    assert theta_nullwert("theta2", 1j).real == pytest.approx(THETA2_I, abs=1e-14)
    t2, t3, t4 = (theta_nullwert(k, 1j) for k in "234")
    assert abs(t2 ** 4 + t4 ** 4 - t3 ** 4) < 1e-13


def test_theta_periodic_and_cap():
    tau = 0.3 + 0.7j
    assert theta_nullwert("3", tau + 2) == pytest.approx(theta_nullwert("3", tau), abs=1e-14)
    with pytest.raises(ThetaTruncationError):
        theta_nullwert("3", 1e-12j)
    with pytest.raises(ValueError):
        theta_nullwert("5", 1j)


def test_theta_mp_path_agrees():
    pytest.importorskip("mpmath")
    z = 0.2 + 0.6j
    assert complex(theta_nullwert("4", z, precision="mp")) == pytest.approx(theta_nullwert("4", z), abs=1e-14)


@given(taus)
def test_theta3_s_transformation(tau):
    lhs = theta_nullwert("3", -1 / tau)
    assert lhs == pytest.approx(branch_power(tau, 0.5) * theta_nullwert("3", tau), rel=1e-11)


def test_gauss_sum_examples():
    assert gauss_sum(4, 1) == pytest.approx(2 + 2j, abs=1e-14)
    assert gauss_sum(4, 1) ** 2 == pytest.approx(8j, abs=1e-13)
    g = g_small(2, 1).value
    assert g == pytest.approx(1 + 1j, abs=1e-14)
    assert abs(g) == pytest.approx(math.sqrt(2))
    with pytest.raises(ValueError):
        g_small(4, 2)
    with pytest.raises(ValueError):
        gauss_sum(0, 1)


@given(st.integers(1, 120), st.integers(-500, 500))
def test_gauss_root_exponent_matches_summation(c, d):
    if math.gcd(c, d) != 1 or (c - d) % 2 == 0:
        return
    g = g_small(c, d).value
    assert abs(g) == pytest.approx(math.sqrt(c), rel=1e-12)
    e = gauss_root_exponent(c, d)
    assert cmath.exp(1j * math.pi * e / 4) == pytest.approx(math.sqrt(c) / g, abs=1e-11)
    assert g ** 8 == pytest.approx(c ** 4, rel=1e-11)


def test_jacobi_symbol_small_table():
    # Legendre symbols mod 7: residues 1, 2, 4
    assert [jacobi_symbol(a, 7) for a in range(1, 7)] == [1, 1, -1, 1, -1, -1]
    assert jacobi_symbol(3, 9) == 0
    with pytest.raises(ValueError):
        jacobi_symbol(1, 8)


def test_cocycle_examples():
    assert theta_cocycle_power(1, 0, 1j, 2) == pytest.approx(1.0, abs=1e-15)
    assert theta_cocycle_power(1, 0, 2j, 2) == pytest.approx(0.5, abs=1e-15)
    tau = 0.1 + 0.9j
    ref = theta_multiplier(1, 0, 2, 1, tau) ** -8
    assert abs(theta_cocycle_power(2, 1, tau, 8) - ref) < 1e-9
    for bad in ((0, 1), (2, 4), (3, 1)):
        with pytest.raises(ValueError):
            theta_cocycle_power(*bad, 1j, 2)


@pytest.mark.parametrize("row", [(2, 1), (2, -1), (4, 3), (6, -5), (1, 0), (3, 2), (5, -4)])
@pytest.mark.parametrize("p", [2, 4, 6])
def test_cocycle_is_inverse_multiplier_power(row, p):
    c, d = row
    a = pow(d, -1, c) if c > 1 else 0
    # choose the upper row so that the matrix lies in the theta group
    for cand in (a, a - c, a + c):
        if (cand * d - 1) % c == 0 and (cand + (cand * d - 1) // c) % 2 == 1:
            a = cand
            break
    b = (a * d - 1) // c
    for tau in (0.3 + 0.5j, -0.8 + 1.2j):
        m = theta_multiplier(a, b, c, d, tau)
        assert abs(m ** p * theta_cocycle_power(c, d, tau, p) - 1) < 1e-10
