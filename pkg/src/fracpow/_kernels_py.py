"""Pure-Python/NumPy versions of the compiled kernels in ``_kernels.pyx``."""

import numpy as np
import scipy.sparse as sp


def pcg_csr(indptr, indices, data, rhs, inv_diag, tol, maxiter):
    n = rhs.shape[0]
    A = sp.csr_matrix((data, indices, indptr), shape=(n, n))
    x = np.zeros(n)
    r = np.array(rhs, dtype=np.float64, copy=True)
    bnorm = np.sqrt(r @ r)
    if bnorm == 0.0:
        return x, 0, 0.0, True
    z = inv_diag * r
    p = z.copy()
    rz = r @ z
    rnorm = bnorm
    it = 0
    converged = False
    while it < maxiter:
        q = A @ p
        pAp = p @ q
        if pAp <= 0.0:
            break
        alpha = rz / pAp
        x += alpha * p
        r -= alpha * q
        rnorm = np.sqrt(r @ r)
        it += 1
        if rnorm <= tol * bnorm:
            converged = True
            break
        z = inv_diag * r
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x, it, rnorm / bnorm, converged


def resolvent_sum(weights, shift, scale, lambdas):
    lambdas = np.asarray(lambdas, dtype=np.float64)
    out = np.empty(lambdas.shape[0])
    # chunk to bound the temporary (nodes x lambdas) array
    step = max(1, 2_000_000 // max(1, weights.shape[0]))
    for s in range(0, lambdas.shape[0], step):
        lam = lambdas[s:s + step]
        out[s:s + step] = (weights[None, :] / (shift[None, :] + scale[None, :] * lam[:, None])).sum(axis=1)
    return out
