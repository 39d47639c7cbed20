"""Fractional powers of symmetric elliptic operators by resolvent quadrature."""

from .kernels import BACKEND
from .quadrature import (
    QuadratureScheme,
    c_beta,
    dyadic_gauss_scheme,
    eval_scheme,
    exponential_scheme,
    make_scheme,
    rectangle_scheme,
    sup_error,
)

__version__ = "0.1.0"
