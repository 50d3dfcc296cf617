"""Kernel selection: the compiled extension when importable, numpy otherwise.

Set ``SPHERE_INTERP_BACKEND=python`` to force the numpy path.
"""
from __future__ import annotations

import logging
import os

from . import _fallback

log = logging.getLogger(__name__)

_impl = _fallback
NAME = "python"

if os.environ.get("SPHERE_INTERP_BACKEND", "").lower() not in ("python", "numpy"):
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]

        NAME = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        log.info("compiled kernels unavailable, using numpy fallback")
        _impl = _fallback


def get(name: str | None = None):
    """Return the kernel module by name (``"cython"``, ``"python"``) or the active one."""
    if name is None:
        return _impl
    if name == "python":
        return _fallback
    if name == "cython":
        from . import _speedups

        return _speedups
    raise ValueError(f"unknown backend {name!r}")


def row_data(parity, c):
    return _impl.row_data(parity, c)


def twisted_sums(parity, c_start, c_stop, r2, n_max):
    return _impl.twisted_sums(parity, c_start, c_stop, r2, n_max)


def periodized_sum(c, d0, alpha, e, p, r2, nodes, L=6):
    return _impl.periodized_sum(c, d0, alpha, e, p, r2, nodes, L)


def box_sum(c, d, alpha, e, p, r2, tau):
    return _impl.box_sum(c, d, alpha, e, p, r2, tau)
