"""The compiled kernels and the numpy fallback compute the same sums."""
import numpy as np
import pytest

from sphere_interp import BACKEND, _backend
from sphere_interp.series import _residues

py = _backend.get("python")
try:
    cy = _backend.get("cython")
except ImportError:  # pragma: no cover - extension not built
    cy = None

needs_ext = pytest.mark.skipif(cy is None, reason="compiled extension not built")


def test_backend_name():
    assert BACKEND in ("cython", "python")
    with pytest.raises(ValueError):
        _backend.get("fortran")


@needs_ext
@pytest.mark.parametrize("parity", [0, 1])
def test_row_data(parity):
    for a, b in zip(py.row_data(parity, 37), cy.row_data(parity, 37)):
        np.testing.assert_array_equal(np.asarray(a), np.asarray(b))


@needs_ext
@pytest.mark.parametrize("parity", [0, 1])
def test_twisted_sums(parity):
    r2 = np.array([0.0, 0.5, 2.0])
    np.testing.assert_allclose(py.twisted_sums(parity, 1, 40, r2, 5), cy.twisted_sums(parity, 1, 40, r2, 5),
                               atol=1e-11)


@needs_ext
@pytest.mark.parametrize("parity", [0, 1])
def test_periodized_and_box_sums(parity):
    c, d0, al, e = _residues(parity, 20)
    nodes = np.array([-0.7 + 0.4j, 0.1 + 0.9j, 0.95 + 0.2j])
    a = py.periodized_sum(c, d0, al, e, 7, 0.49, nodes, 6)
    b = cy.periodized_sum(c, d0, al, e, 7, 0.49, nodes, 6)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-14)
    d = d0 + 2 * c
    assert py.box_sum(c, d, al, e, 7, 0.49 + 0j, 0.2 + 1.1j) == pytest.approx(
        cy.box_sum(c, d, al, e, 7, 0.49 + 0j, 0.2 + 1.1j), rel=1e-12)
