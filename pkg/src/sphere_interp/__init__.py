"""Fourier interpolation bases on spheres: modular series, coefficients and kernels."""
from ._backend import NAME as BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
