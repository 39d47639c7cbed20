"""Dense generalized eigendecomposition of (A, M): exact discrete powers."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .fem import Field

DEFAULT_DOF_CAP = 5000


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """``A psi_i = lambda_i M psi_i`` with M-orthonormal columns, ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    mass: object

    def coefficients(self, f):
        return self.eigenvectors.T @ (self.mass @ f.values)

    def mode(self, f_like, i):
        return Field(f_like.mesh, self.eigenvectors[:, i].copy())


def decompose(pair, cap=DEFAULT_DOF_CAP):
    """Reduce with ``M = R^T R`` and solve the standard symmetric problem."""
    n = pair.ndof
    if n > cap:
        raise ValueError(f"{n} dofs exceeds the dense oracle cap of {cap}")
    M = pair.M.toarray()
    A = pair.A.toarray()
    try:
        R = sla.cholesky(M, lower=False)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"mass matrix factorization failed: {exc}") from exc
    # C = R^-T A R^-1
    tmp = sla.solve_triangular(R, A, trans="T", lower=False)
    C = sla.solve_triangular(R, tmp.T, trans="T", lower=False).T
    C = 0.5 * (C + C.T)
    lam, V = sla.eigh(C)
    psi = sla.solve_triangular(R, V, lower=False)
    return EigenDecomposition(lam, psi, pair.M)


def apply_power(decomp, beta, f):
    """``sum_i lambda_i**(-beta) <f, psi_i>_M psi_i``; negative beta gives powers of L_h."""
    c = decomp.coefficients(f)
    return Field(f.mesh, decomp.eigenvectors @ (decomp.eigenvalues ** (-float(beta)) * c))


def dotted_norm(decomp, s, f):
    """Discrete dotted norm ``(sum_i lambda_i**s <f, psi_i>_M**2)**0.5``."""
    c = decomp.coefficients(f)
    return math.sqrt(float(np.sum(decomp.eigenvalues ** float(s) * c**2)))
