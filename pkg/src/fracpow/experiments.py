"""Quadrature error tables and the FEM convergence study."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import fem, reference
from .frac_apply import apply_frac_inverse
from .quadrature import exponential_scheme, make_scheme, operator_bound, sup_error

TABLE_BETAS = (0.5, 0.75, 0.25)
TABLE1_SIZES = (31, 63, 127, 255, 511, 1023)
TABLE2_SIZES = (2, 4, 8, 16)
TABLE3_STEPS = (1.0, 1 / 2, 1 / 3, 1 / 4)

DEFAULT_MESHES = (8, 16, 32, 64)
AROC_BETAS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)

# exponential step sizes tried, coarsest first, when choosing "negligible" quadrature
K_CANDIDATES = tuple(1.0 / j for j in range(2, 13))
QUADRATURE_MARGIN = 1e-2

TABLE_COLUMNS = ("scheme", "beta", "param", "sup_error", "nsys")
CONVERGENCE_COLUMNS = ("beta", "n", "h", "l2_error", "oroc", "k", "nsys")
SUMMARY_COLUMNS = ("beta", "aroc", "predicted_rate", "k", "quadrature_bound", "tail_bound", "tail_estimate")


def table_rows(kind, betas, sizes, r=2, lambda0=10.0):
    """Sup-norm quadrature errors over ``lam >= lambda0``.

    ``sizes`` are N for ``rect``/``gauss`` and step sizes k for ``exp``.
    """
    rows = []
    for beta in betas:
        for size in sizes:
            if kind == "exp":
                scheme = make_scheme(kind, beta, k=size)
            else:
                scheme = make_scheme(kind, beta, N=int(size), r=r)
            rep = sup_error(scheme, lambda0)
            rows.append({"scheme": kind, "beta": beta, "param": size,
                         "sup_error": rep.sup_error, "nsys": scheme.nsys})
    return rows


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    return str(value)


def to_csv(rows, columns):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# convergence study


def oroc(errors, hs):
    """Observed rates ``ln(e_i / e_{i+1}) / ln(h_i / h_{i+1})``."""
    return [math.log(errors[i] / errors[i + 1]) / math.log(hs[i] / hs[i + 1])
            for i in range(len(errors) - 1)]


def predicted_rate(beta):
    """L2 rate in h for the checkerboard source, ignoring the log factor."""
    return 2.0 if beta > 0.75 else 2.0 * (beta + 0.25)


def lambda_min_lower_bound(a0=1.0):
    """Lower bound for the smallest discrete eigenvalue (conforming min-max)."""
    return 2.0 * math.pi**2 * a0


def choose_k(beta, target, lambda0):
    """Coarsest candidate step whose operator bound is below ``target``."""
    for k in K_CANDIDATES:
        scheme = exponential_scheme(beta, k)
        if operator_bound(scheme, 1.0 / lambda0) <= target:
            return k
    return K_CANDIDATES[-1]


@dataclass
class ConvergenceRow:
    beta: float
    n: int
    h: float
    l2_error: float
    oroc: float | None = None
    k: float | None = None
    nsys: int | None = None

    def as_dict(self):
        return {"beta": self.beta, "n": self.n, "h": self.h, "l2_error": self.l2_error,
                "oroc": self.oroc, "k": self.k, "nsys": self.nsys}


@dataclass
class ConvergenceSummary:
    beta: float
    aroc: float
    predicted_rate: float
    k: float
    quadrature_bound: float
    tail_bound: float
    tail_estimate: float
    rows: list = field(default_factory=list)

    def as_dict(self):
        return {c: getattr(self, c) for c in SUMMARY_COLUMNS}


class _MeshCache:
    def __init__(self, config):
        self.config = config
        self._data = {}

    def get(self, n):
        if n not in self._data:
            mesh = fem.build_mesh(n)
            pair = fem.assemble(mesh)
            f = fem.l2_project(mesh, pair, reference.checkerboard, self.config)
            self._data[n] = (mesh, pair, f)
        return self._data[n]


def convergence_study(beta, meshes=DEFAULT_MESHES, k=None, config=None, threads=None,
                      modes=reference.DEFAULT_MODES, cache=None):
    """L2 errors of the exponential-rule FEM solution against the sine series.

    Without an explicit ``k`` the step is picked so that the operator
    quadrature bound sits ``QUADRATURE_MARGIN`` below the FEM error
    extrapolated to the finest mesh from the two coarsest ones.
    """
    meshes = tuple(int(n) for n in meshes)
    if len(meshes) < 2 or list(meshes) != sorted(meshes):
        raise ValueError("need at least two meshes in ascending order")
    config = config or fem.SolverConfig()
    cache = cache or _MeshCache(config)
    exact = reference.exact_solution(beta, modes)
    lam0 = lambda_min_lower_bound()

    def error_for(n, step):
        mesh, pair, f = cache.get(n)
        scheme = exponential_scheme(beta, step)
        u, _ = apply_frac_inverse(pair, scheme, f, config, threads)
        return fem.l2_error(u, exact), scheme.nsys

    errors = {}
    if k is None:
        step = K_CANDIDATES[0]
        for n in meshes[:2]:
            errors[n] = error_for(n, step)
        e0, e1 = errors[meshes[0]][0], errors[meshes[1]][0]
        h0, h1, hf = (math.sqrt(2.0) / n for n in (meshes[0], meshes[1], meshes[-1]))
        rate = max(oroc([e0, e1], [h0, h1])[0], 0.0)
        e_fine = e1 * (hf / h1) ** rate
        k = choose_k(beta, QUADRATURE_MARGIN * e_fine, lam0)
        if k != step:
            errors.clear()
    for n in meshes:
        if n not in errors:
            errors[n] = error_for(n, k)

    hs = [math.sqrt(2.0) / n for n in meshes]
    errs = [errors[n][0] for n in meshes]
    rates = oroc(errs, hs)
    rows = [ConvergenceRow(beta, n, h, e, None if i == 0 else rates[i - 1], k, errors[n][1])
            for i, (n, h, e) in enumerate(zip(meshes, hs, errs))]
    bound = operator_bound(exponential_scheme(beta, k), 1.0 / lam0)
    return ConvergenceSummary(beta, float(np.mean(rates)), predicted_rate(beta), k, bound,
                              exact.tail_bound(), exact.tail_estimate(), rows)


# ---------------------------------------------------------------------------
# operator vs oracle


@dataclass
class OracleCheck:
    scheme: str
    max_error: float
    bound: float
    rigorous: bool
    lambda_min: float

    @property
    def passed(self):
        return self.max_error <= self.bound or not self.rigorous


def oracle_check(scheme, n=16, samples=10, seed=0, config=None, threads=None, decomp=None):
    """Max over random unit fields of ``||Q_h f - T_h^beta f||_M`` against the bound."""
    from .quadrature import bound_is_rigorous
    from .spectral import apply_power, decompose

    mesh = fem.build_mesh(n)
    pair = fem.assemble(mesh)
    decomp = decomp or decompose(pair)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        v = rng.standard_normal(mesh.ndof)
        f = fem.Field(mesh, v)
        f = fem.Field(mesh, v / fem.l2_norm(pair, f))
        q, _ = apply_frac_inverse(pair, scheme, f, config, threads)
        t = apply_power(decomp, scheme.beta, f)
        worst = max(worst, fem.l2_norm(pair, fem.Field(mesh, q.values - t.values)))
    lam_min = float(decomp.eigenvalues[0])
    return OracleCheck(scheme.summary(), worst, operator_bound(scheme, 1.0 / lam_min),
                       bound_is_rigorous(scheme), lam_min)
