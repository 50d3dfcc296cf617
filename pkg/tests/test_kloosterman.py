"""Bessel functions, Kloosterman-type sums and the closed-form coefficients."""
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sphere_interp import _backend
from sphere_interp.bessel import BesselOrder, bessel_j, bessel_j_full, bessel_j_scaled, half_integer_j
from sphere_interp.kloosterman import (classical_kloosterman, closed_form_table, closed_tail_bound, coeff_closed,
                                       kloosterman_sum, poincare_coeff, poincare_sigma, poincare_table)

from oracles import b8_at_zero, b8_tilde_at_zero

scipy_special = pytest.importorskip("scipy.special")

# mpmath besselj at 30 digits
MP_J = [
    (1.5, 2.0, 0.49129377868716234501),
    (2.0, 1.0, 0.11490348493190048047),
    (3.5, 10.0, -0.099653250964983898472),
    (4.0, 30.0, -0.052609000321320352293),
    (2.5, 7.3, -0.30084943158749980838),
    (5.5, 0.37, 3.2206054189856350218e-07),
]


@pytest.mark.parametrize("nu,x,ref", MP_J)
def test_bessel_reference_values(nu, x, ref):
    assert bessel_j(nu, x) == pytest.approx(ref, rel=1e-12, abs=1e-15)


def test_bessel_examples():
    assert bessel_j(2.5, 0.0) == 0.0
    assert bessel_j(1.5, 2.0) == pytest.approx(math.sqrt(1 / math.pi) * (math.sin(2) / 2 - math.cos(2)),
                                               rel=1e-13)
    assert half_integer_j(1.5, 2.0) == pytest.approx(0.49129377868716234501, rel=1e-13)
    with pytest.raises(ValueError):
        BesselOrder(0.0)
    with pytest.raises(ValueError):
        bessel_j(1.5, -1.0)


@given(st.floats(1.5, 40.0), st.floats(0.0, 200.0))
def test_bessel_against_scipy(nu, x):
    ref = scipy_special.jv(nu, x)
    res = bessel_j_full(nu, x)
    assert abs(float(res.value) - ref) <= 1e-12 * max(1.0, abs(ref)) + 1e-13


@given(st.floats(1.5, 120.0), st.floats(0.0, 300.0))
def test_scaled_bessel(nu, x):
    v = bessel_j_scaled(nu, x)
    assert abs(v) <= 1.0 + 1e-12
    if x > 0:
        lg = math.lgamma(nu + 1) - nu * math.log(x / 2)
        if lg < 600:
            ref = scipy_special.jv(nu, x) * math.exp(lg)
            assert v == pytest.approx(ref, abs=1e-11)
    else:
        assert v == 1.0


def test_kloosterman_direct_example():
    s = kloosterman_sum(8, 2, 0.0, 2)
    assert s.value == pytest.approx(-2.0, abs=1e-13)
    assert s.n_terms == 2


@given(st.integers(5, 14), st.integers(1, 6), st.floats(0, 3), st.integers(1, 40))
def test_kloosterman_trivial_bound(p, n, r, c):
    kind = "even_c" if c % 2 == 0 else "odd_c"
    s = kloosterman_sum(p, n, r, c, kind)
    assert abs(s.value) <= s.n_terms + 1e-9


@pytest.mark.parametrize("tilde", [False, True])
def test_compiled_twisted_sums_match_direct(tilde):
    parity = 1 if tilde else 0
    r2 = np.array([0.0, 0.49, 2.0])
    T = _backend.twisted_sums(parity, 1, 21, r2, 4)            # (nc, 8, R, N)
    roots = np.exp(1j * np.pi * 7 * np.arange(8) / 4)
    S = np.einsum("cerN,e->crN", T, roots)
    cs = [c for c in range(1, 21) if c % 2 == parity]
    for i, c in enumerate(cs):
        for j, r in enumerate(np.sqrt(r2)):
            for n in range(1, 5):
                ref = kloosterman_sum(7, n, r, c, "odd_c" if tilde else "even_c").value
                assert S[i, j, n - 1] == pytest.approx(ref, abs=1e-11)


def test_closed_form_r0_p6_partial_sum():
    """``-pi pi^2 / Gamma(3) sum_{c even <= 200} c^{-3} S_6(0,1,c)``."""
    direct = sum(c ** -3.0 * kloosterman_sum(6, 1, 0.0, c).value for c in range(2, 201, 2))
    ref = -math.pi * math.pi ** 2 / math.gamma(3) * direct
    tab = closed_form_table([6], 1, [0.0], 200)
    assert tab.partial[0, 0, 0] == pytest.approx(ref, abs=1e-12)
    assert abs(tab.extrapolated[0, 0, 0] - 4.0) < 1e-3


def test_closed_form_requires_positive_n():
    with pytest.raises(ValueError):
        coeff_closed(8, 0, 1.0)
    with pytest.raises(ValueError):
        coeff_closed(4, 1, 1.0)


def test_closed_form_theta_oracle():
    """``p = 8``, ``r = 0`` against ``1 - Theta_4(2 tau)^8`` and ``Theta_2(tau/2)^8/16``."""
    n_max = 10
    tab = closed_form_table([8], n_max, [0.0], 2000)
    ttab = closed_form_table([8], n_max, [0.0], 2000, tilde=True)
    np.testing.assert_allclose(tab.extrapolated[0, 0].real, b8_at_zero(n_max), atol=2e-5)
    np.testing.assert_allclose(ttab.extrapolated[0, 0].real, b8_tilde_at_zero(n_max), atol=2e-5)
    assert np.all(tab.error[0, 0] < 2e-5)


def test_closed_tail_bound_dominates_extrapolation():
    res = coeff_closed(8, 3, 0.7, c_max=400)
    ext = coeff_closed(8, 3, 0.7, c_max=400, extrapolate=True)
    assert abs(res.value - ext.value) <= res.tail_bound
    assert closed_tail_bound(8, 3, 0.7, 800) < closed_tail_bound(8, 3, 0.7, 400)


def test_poincare_cross_identity():
    b = coeff_closed(8, 2, 1.0, c_max=4000, extrapolate=True)
    P = poincare_coeff(4, 1, 2, tol=1e-9)
    assert abs(b.value + P) / (1 + abs(P)) < 1e-6


def test_poincare_matched_truncation():
    C = 200
    tab = closed_form_table([8], 4, [1.0, math.sqrt(3)], C)
    sig = poincare_table(4, 3, 4, 2 * C)
    for m, j in ((1, 0), (3, 1)):
        for n in range(1, 5):
            P = 2 * math.pi * (1j) ** -4 * (n / m) ** 1.5 * ((m == n) + sig[m - 1, n - 1])
            b = tab.partial[0, j, n - 1]
            if m != n:
                assert abs(b + P) < 1e-11 * (1 + abs(P))
            else:
                assert (b + P) == pytest.approx(2 * math.pi, abs=1e-9)


def test_poincare_diagonal_and_symmetry():
    k, m = 4, 2
    C = 400
    P = poincare_coeff(k, m, m, c_max=C)
    sig = poincare_sigma(k, m, m, C)
    assert P - 2 * math.pi * (1j) ** (-k) * sig == pytest.approx(2 * math.pi * (1j) ** (-k), abs=1e-12)
    for a, b in ((1, 2), (3, 5), (2, 7)):
        assert classical_kloosterman(a, b, 4, 4) == pytest.approx(classical_kloosterman(b, a, 4, 4), abs=1e-12)
    with pytest.raises(ValueError):
        classical_kloosterman(1, 1, 6, 4)
