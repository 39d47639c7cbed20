"""Discrete fractional inverse ``Q_h^beta f`` from independent resolvent solves."""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .fem import T1, T2, Field, SolverConfig, SolverError, shifted_solve_rhs
from .quadrature import c_beta


@dataclass(frozen=True)
class ApplyReport:
    nsys_executed: int
    max_cg_iterations: int
    max_relative_residual: float
    wall_time: float
    scheme: str
    threads: int


def default_threads():
    value = os.environ.get("FRACPOW_THREADS", "")
    try:
        return max(1, int(value))
    except ValueError:
        return 1


def node_list(scheme):
    """``(family, t, weight)`` in the fixed reduction order: family 1, then 2."""
    nodes = [(T1, float(t), float(w)) for t, w in zip(scheme.t1_nodes, scheme.t1_weights)]
    nodes += [(T2, float(t), float(w)) for t, w in zip(scheme.t2_nodes, scheme.t2_weights)]
    return nodes


def apply_frac_inverse(pair, scheme, f, config=None, threads=None):
    """Return ``(Q_h^beta f, report)``.

    Each node contributes ``w * T_{i,h}(t) f``; solves may run on a thread
    pool but are accumulated in ascending node order, so the result does not
    depend on the thread count.
    """
    if f.values.shape[0] != pair.ndof:
        raise ValueError("field and operator live on different meshes")
    config = config or SolverConfig()
    threads = default_threads() if threads is None else max(1, int(threads))
    rhs = pair.M @ f.values
    nodes = node_list(scheme)

    def solve(node):
        family, t, _ = node
        try:
            return shifted_solve_rhs(pair, t, rhs, family, config)
        except SolverError as exc:
            raise SolverError(f"{family} solve at t={t:.6g} failed: {exc}",
                              exc.residual, exc.iterations) from exc

    start = time.perf_counter()
    acc = np.zeros(pair.ndof)
    max_it, max_res = 0, 0.0
    if threads == 1:
        results = map(solve, nodes)
        for (_, _, w), (u, info) in zip(nodes, results):
            acc += w * u
            max_it, max_res = max(max_it, info.iterations), max(max_res, info.relative_residual)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for (_, _, w), (u, info) in zip(nodes, pool.map(solve, nodes)):
                acc += w * u
                max_it, max_res = max(max_it, info.iterations), max(max_res, info.relative_residual)
    acc /= c_beta(scheme.beta)
    report = ApplyReport(len(nodes), max_it, max_res, time.perf_counter() - start,
                         scheme.summary(), threads)
    return Field(f.mesh, acc), report
