"""Kernel backend selection.

The Cython extension ``fracpow._kernels`` is used when it was built;
otherwise the NumPy fallback in ``fracpow._kernels_py`` is used. Setting
``FRACPOW_PURE_PYTHON=1`` forces the fallback.
"""

import os

import numpy as np

from . import _kernels_py

_compiled = None
if os.environ.get("FRACPOW_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"
_impl = _compiled if _compiled is not None else _kernels_py


def pcg_csr(indptr, indices, data, rhs, inv_diag, tol, maxiter, backend=None):
    impl = _select(backend)
    return impl.pcg_csr(
        np.ascontiguousarray(indptr, dtype=np.intp),
        np.ascontiguousarray(indices, dtype=np.intp),
        np.ascontiguousarray(data, dtype=np.float64),
        np.ascontiguousarray(rhs, dtype=np.float64),
        np.ascontiguousarray(inv_diag, dtype=np.float64),
        float(tol),
        int(maxiter),
    )


def resolvent_sum(weights, shift, scale, lambdas, backend=None):
    impl = _select(backend)
    return impl.resolvent_sum(
        np.ascontiguousarray(weights, dtype=np.float64),
        np.ascontiguousarray(shift, dtype=np.float64),
        np.ascontiguousarray(scale, dtype=np.float64),
        np.ascontiguousarray(np.atleast_1d(lambdas), dtype=np.float64),
    )


def _select(backend):
    if backend is None:
        return _impl
    if backend == "python":
        return _kernels_py
    if backend == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available")
        return _compiled
    raise ValueError(f"unknown backend {backend!r}")
