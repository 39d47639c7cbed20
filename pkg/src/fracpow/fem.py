"""P1 finite elements on a structured triangulation of the unit square.

Homogeneous Dirichlet conditions are imposed by eliminating boundary
vertices; all matrices and fields live on interior degrees of freedom.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import kernels

# 6-point symmetric rule, exact for degree 4 on triangles (barycentric coords).
_QA, _WA = 0.445948490915965, 0.223381589678011
_QB, _WB = 0.091576213509771, 0.109951743655322
QUAD_BARY = np.array([
    [_QA, _QA, 1 - 2 * _QA],
    [_QA, 1 - 2 * _QA, _QA],
    [1 - 2 * _QA, _QA, _QA],
    [_QB, _QB, 1 - 2 * _QB],
    [_QB, 1 - 2 * _QB, _QB],
    [1 - 2 * _QB, _QB, _QB],
])
QUAD_WEIGHTS = np.array([_WA, _WA, _WA, _WB, _WB, _WB])


class SolverError(RuntimeError):
    """CG failed to reach the requested tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True, eq=False)
class StructuredMesh:
    """``n x n`` squares, each split along the diagonal from (x, y) to (x+h, y+h)."""

    n: int
    vertices: np.ndarray
    triangles: np.ndarray
    interior: np.ndarray
    interior_index: np.ndarray
    h: float
    rho_shape: float = 1.0

    @property
    def ndof(self):
        return int(self.interior.size)

    def areas(self):
        X = self.vertices[self.triangles]
        d1 = X[:, 1] - X[:, 0]
        d2 = X[:, 2] - X[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def quadrature_points(self):
        """Element quadrature points, shape ``(ntri, 6, 2)``."""
        return np.einsum("qk,ekd->eqd", QUAD_BARY, self.vertices[self.triangles])


def build_mesh(n):
    n = int(n)
    if n < 2:
        raise ValueError("need n >= 2 for at least one interior vertex")
    x = np.linspace(0.0, 1.0, n + 1)
    X, Y = np.meshgrid(x, x, indexing="xy")
    vertices = np.column_stack([X.ravel(), Y.ravel()])
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="xy")
    v00 = (i + j * (n + 1)).ravel()
    v10, v01 = v00 + 1, v00 + n + 1
    v11 = v01 + 1
    triangles = np.concatenate([
        np.column_stack([v00, v10, v11]),
        np.column_stack([v00, v11, v01]),
    ])
    iv, jv = np.divmod(np.arange((n + 1) ** 2), n + 1)
    boundary = (iv == 0) | (iv == n) | (jv == 0) | (jv == n)
    interior = np.flatnonzero(~boundary)
    index = -np.ones((n + 1) ** 2, dtype=np.intp)
    index[interior] = np.arange(interior.size)
    return StructuredMesh(n, vertices, triangles, interior, index, math.sqrt(2.0) / n)


@dataclass(frozen=True, eq=False)
class SparseOperatorPair:
    """Stiffness ``A`` and mass ``M`` on interior dofs, sharing one CSR pattern."""

    A: sp.csr_matrix
    M: sp.csr_matrix
    a0: float = 1.0

    @property
    def ndof(self):
        return self.A.shape[0]

    def combination(self, alpha, beta):
        """CSR data of ``alpha * M + beta * A`` (same pattern as ``M``)."""
        return self.M.indptr, self.M.indices, alpha * self.M.data + beta * self.A.data


def _element_matrices(mesh, a0):
    X = mesh.vertices[mesh.triangles]
    d1 = X[:, 1] - X[:, 0]
    d2 = X[:, 2] - X[:, 0]
    area = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
    G = np.empty((len(area), 3, 2))
    G[:, 1] = np.column_stack([d2[:, 1], -d2[:, 0]]) / (2.0 * area[:, None])
    G[:, 2] = np.column_stack([-d1[:, 1], d1[:, 0]]) / (2.0 * area[:, None])
    G[:, 0] = -G[:, 1] - G[:, 2]
    K = a0 * np.einsum("eik,ejk->eij", G, G) * area[:, None, None]
    Mloc = (np.ones((3, 3)) + np.eye(3)) / 12.0 * area[:, None, None]
    return K, Mloc


def assemble(mesh, a0=1.0, eliminate=True):
    """Assemble stiffness and mass matrices for ``-div(a0 grad u)``.

    With ``eliminate`` (default) the result is restricted to interior dofs;
    otherwise the full vertex-indexed matrices are returned.
    """
    a0 = float(a0)
    if not a0 > 0:
        raise ValueError("a0 must be positive")
    K, Mloc = _element_matrices(mesh, a0)
    T = mesh.triangles
    rows = np.repeat(T, 3, axis=1).ravel()
    cols = np.tile(T, (1, 3)).ravel()
    kd, md = K.ravel(), Mloc.ravel()
    if eliminate:
        ri, ci = mesh.interior_index[rows], mesh.interior_index[cols]
        keep = (ri >= 0) & (ci >= 0)
        rows, cols, kd, md = ri[keep], ci[keep], kd[keep], md[keep]
        size = mesh.ndof
    else:
        size = mesh.vertices.shape[0]
    A = sp.coo_matrix((kd, (rows, cols)), shape=(size, size)).tocsr()
    M = sp.coo_matrix((md, (rows, cols)), shape=(size, size)).tocsr()
    A.sort_indices()
    M.sort_indices()
    if not (np.array_equal(A.indptr, M.indptr) and np.array_equal(A.indices, M.indices)):
        raise AssertionError("stiffness and mass patterns differ")
    return SparseOperatorPair(A, M, a0)


@dataclass(eq=False)
class Field:
    """Nodal values at the interior vertices of ``mesh``."""

    mesh: StructuredMesh
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (self.mesh.ndof,):
            raise ValueError(f"field has {self.values.shape} values, mesh has {self.mesh.ndof} dofs")

    def full(self):
        """Values at all vertices (zero on the boundary)."""
        out = np.zeros(self.mesh.vertices.shape[0])
        out[self.mesh.interior] = self.values
        return out


@dataclass(frozen=True)
class SolverConfig:
    rel_tolerance: float = 1e-12
    max_iterations: int | None = None
    preconditioner: str = "diagonal"

    def __post_init__(self):
        if not (0.0 < self.rel_tolerance < 1.0):
            raise ValueError("rel_tolerance must lie in (0, 1)")
        if self.preconditioner not in ("none", "diagonal"):
            raise ValueError(f"unknown preconditioner {self.preconditioner!r}")

    def iterations_for(self, ndof):
        return self.max_iterations if self.max_iterations is not None else 10 * ndof


@dataclass(frozen=True)
class SolveInfo:
    iterations: int
    relative_residual: float


def _pcg(indptr, indices, data, rhs, config):
    n = rhs.shape[0]
    if config.preconditioner == "diagonal":
        diag = sp.csr_matrix((data, indices, indptr), shape=(n, n)).diagonal()
        if np.any(diag <= 0):
            raise SolverError("matrix has a nonpositive diagonal entry")
        inv_diag = 1.0 / diag
    else:
        inv_diag = np.ones(n)
    maxiter = config.iterations_for(n)
    x, it, relres, ok = kernels.pcg_csr(indptr, indices, data, rhs, inv_diag,
                                        config.rel_tolerance, maxiter)
    if not ok:
        raise SolverError(
            f"CG did not converge in {it} iterations (relative residual {relres:.3e})",
            residual=relres, iterations=it)
    return x, SolveInfo(it, relres)


def cg_solve(matrix, rhs, config=None, return_info=False):
    """Solve ``matrix @ x = rhs`` for SPD ``matrix`` by preconditioned CG."""
    config = config or SolverConfig()
    A = sp.csr_matrix(matrix)
    A.sort_indices()
    rhs = np.asarray(rhs, dtype=np.float64)
    x, info = _pcg(A.indptr, A.indices, A.data, rhs, config)
    return (x, info) if return_info else x


T1 = "T1"
T2 = "T2"


def shifted_solve_rhs(pair, t, rhs, family, config=None):
    """Solve ``(M + t^2 A) u = rhs`` (T1) or ``(t^2 M + A) u = rhs`` (T2)."""
    config = config or SolverConfig()
    t = float(t)
    if not t >= 0:
        raise ValueError("t must be nonnegative")
    if family == T1:
        alpha, beta = 1.0, t * t
    elif family == T2:
        alpha, beta = t * t, 1.0
    else:
        raise ValueError(f"unknown family {family!r}")
    indptr, indices, data = pair.combination(alpha, beta)
    return _pcg(indptr, indices, data, rhs, config)


def shifted_solve(pair, t, f, family, config=None, return_info=False):
    """Apply the discrete resolvent of the given family to ``f``."""
    u, info = shifted_solve_rhs(pair, t, pair.M @ f.values, family, config)
    out = Field(f.mesh, u)
    return (out, info) if return_info else out


def load_vector(mesh, f):
    """``b_i = int f phi_i`` by the 6-point element rule.

    ``f`` is a vectorized callable ``f(x, y)``.
    """
    Q = mesh.quadrature_points()
    fq = np.asarray(f(Q[..., 0], Q[..., 1]), dtype=np.float64)
    local = np.einsum("eq,qk,q->ek", fq, QUAD_BARY, QUAD_WEIGHTS) * mesh.areas()[:, None]
    full = np.bincount(mesh.triangles.ravel(), local.ravel(), minlength=mesh.vertices.shape[0])
    return full[mesh.interior]


def l2_project(mesh, pair, f, config=None):
    """L2 projection of a pointwise function onto the interior P1 space."""
    b = load_vector(mesh, f)
    return Field(mesh, cg_solve(pair.M, b, config))


def interpolate(mesh, f):
    v = mesh.vertices[mesh.interior]
    return Field(mesh, np.asarray(f(v[:, 0], v[:, 1]), dtype=np.float64))


def l2_norm(pair, f):
    v = f.values
    return math.sqrt(max(float(v @ (pair.M @ v)), 0.0))


def field_at_quadrature(f):
    """Values of the P1 field at the element quadrature points, ``(ntri, 6)``."""
    return f.full()[f.mesh.triangles] @ QUAD_BARY.T


def l2_error(f, u_exact):
    """``||f_h - u_exact||_{L2}`` with the 6-point element rule.

    ``u_exact`` is a callable ``u(x, y)`` on arrays.
    """
    mesh = f.mesh
    Q = mesh.quadrature_points()
    uq = np.asarray(u_exact(Q[..., 0].ravel(), Q[..., 1].ravel()), dtype=np.float64).reshape(Q.shape[:2])
    diff = field_at_quadrature(f) - uq
    return math.sqrt(float(((diff**2) @ QUAD_WEIGHTS) @ mesh.areas()))


def export_field(f, path):
    """Write ``x y value`` rows for every vertex, in vertex order."""
    full = f.full()
    with open(path, "w", newline="\n") as fh:
        for (x, y), v in zip(f.mesh.vertices, full):
            fh.write(f"{float(x)!r} {float(y)!r} {float(v)!r}\n")


def load_field(path):
    data = np.loadtxt(path, ndmin=2)
    nv = data.shape[0]
    n = int(round(math.sqrt(nv))) - 1
    if (n + 1) ** 2 != nv:
        raise ValueError(f"{path}: {nv} rows is not a structured mesh")
    mesh = build_mesh(n)
    if not np.allclose(data[:, :2], mesh.vertices, atol=1e-12):
        raise ValueError(f"{path}: vertex coordinates do not match the structured mesh")
    return Field(mesh, data[mesh.interior, 2])
