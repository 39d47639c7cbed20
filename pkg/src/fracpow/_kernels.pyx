# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: preconditioned CG on CSR matrices and batched
resolvent sums. Both release the GIL so quadrature nodes can be solved
concurrently from a thread pool."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


cdef inline void _csr_matvec(const Py_ssize_t[::1] indptr,
                             const Py_ssize_t[::1] indices,
                             const double[::1] data,
                             const double[::1] x,
                             double[::1] y) noexcept nogil:
    cdef Py_ssize_t i, p, n = y.shape[0]
    cdef double acc
    for i in range(n):
        acc = 0.0
        for p in range(indptr[i], indptr[i + 1]):
            acc = acc + data[p] * x[indices[p]]
        y[i] = acc


def pcg_csr(const Py_ssize_t[::1] indptr, const Py_ssize_t[::1] indices,
            const double[::1] data, const double[::1] rhs,
            const double[::1] inv_diag, double tol, Py_ssize_t maxiter):
    """Diagonally preconditioned CG. Returns (x, iterations, relres, converged)."""
    cdef Py_ssize_t n = rhs.shape[0]
    cdef Py_ssize_t i, it = 0
    cdef double bnorm = 0.0, rnorm, rz, rz_new, pAp, alpha, beta
    cdef bint converged = False

    x_arr = np.zeros(n)
    r_arr = np.array(rhs, dtype=np.float64, copy=True)
    z_arr = np.empty(n)
    p_arr = np.empty(n)
    q_arr = np.empty(n)
    cdef double[::1] x = x_arr
    cdef double[::1] r = r_arr
    cdef double[::1] z = z_arr
    cdef double[::1] p = p_arr
    cdef double[::1] q = q_arr

    with nogil:
        for i in range(n):
            bnorm = bnorm + rhs[i] * rhs[i]
        bnorm = sqrt(bnorm)
        if bnorm == 0.0:
            converged = True
        else:
            rz = 0.0
            for i in range(n):
                z[i] = inv_diag[i] * r[i]
                p[i] = z[i]
                rz = rz + r[i] * z[i]
            rnorm = bnorm
            while it < maxiter:
                _csr_matvec(indptr, indices, data, p, q)
                pAp = 0.0
                for i in range(n):
                    pAp = pAp + p[i] * q[i]
                if pAp <= 0.0:
                    break
                alpha = rz / pAp
                rnorm = 0.0
                for i in range(n):
                    x[i] = x[i] + alpha * p[i]
                    r[i] = r[i] - alpha * q[i]
                    rnorm = rnorm + r[i] * r[i]
                rnorm = sqrt(rnorm)
                it += 1
                if rnorm <= tol * bnorm:
                    converged = True
                    break
                rz_new = 0.0
                for i in range(n):
                    z[i] = inv_diag[i] * r[i]
                    rz_new = rz_new + r[i] * z[i]
                beta = rz_new / rz
                rz = rz_new
                for i in range(n):
                    p[i] = z[i] + beta * p[i]
    relres = 0.0 if bnorm == 0.0 else rnorm / bnorm
    return x_arr, it, relres, bool(converged)


def resolvent_sum(const double[::1] weights, const double[::1] shift,
                  const double[::1] scale, const double[::1] lambdas):
    """out[j] = sum_i weights[i] / (shift[i] + scale[i] * lambdas[j])."""
    cdef Py_ssize_t m = weights.shape[0], nl = lambdas.shape[0]
    cdef Py_ssize_t i, j
    cdef double acc, lam
    out_arr = np.empty(nl)
    cdef double[::1] out = out_arr
    with nogil:
        for j in range(nl):
            lam = lambdas[j]
            acc = 0.0
            for i in range(m):
                acc = acc + weights[i] / (shift[i] + scale[i] * lam)
            out[j] = acc
    return out_arr
