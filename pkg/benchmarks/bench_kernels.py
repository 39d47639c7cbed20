"""Compare the compiled and NumPy kernel backends.

    python3 benchmarks/bench_kernels.py [--n 64] [--repeat 5]
"""

import argparse
import time

import numpy as np
import scipy.sparse as sp

from fracpow import fem, kernels
from fracpow.quadrature import rectangle_scheme


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=64, help="mesh size for the CG benchmark")
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args()

    backends = ["python"] + (["cython"] if kernels.BACKEND == "cython" else [])
    if len(backends) == 1:
        print("compiled extension not built; timing the NumPy backend only")

    pair = fem.assemble(fem.build_mesh(args.n))
    indptr, indices, data = pair.combination(1.0, 0.05)
    rhs = pair.M @ np.random.default_rng(0).standard_normal(pair.ndof)
    inv_diag = 1.0 / sp.csr_matrix((data, indices, indptr)).diagonal()

    scheme = rectangle_scheme(0.5, 1023)
    w, shift, scale = scheme._resolvent_form
    lam = np.geomspace(10, 1e12, 4000)

    print(f"{'kernel':<34}{'backend':<10}{'seconds':>12}")
    results = {}
    for b in backends:
        t_cg = best_of(lambda: kernels.pcg_csr(indptr, indices, data, rhs, inv_diag, 1e-12,
                                               10 * pair.ndof, backend=b), args.repeat)
        t_rs = best_of(lambda: kernels.resolvent_sum(w, shift, scale, lam, backend=b), args.repeat)
        results[b] = (t_cg, t_rs)
        print(f"{f'pcg_csr n={args.n} ({pair.ndof} dofs)':<34}{b:<10}{t_cg:>12.5f}")
        print(f"{f'resolvent_sum {w.size}x{lam.size}':<34}{b:<10}{t_rs:>12.5f}")
    if len(backends) == 2:
        (pc, pr), (cc, cr) = results["python"], results["cython"]
        print(f"speedup  pcg_csr {pc / cc:.1f}x  resolvent_sum {pr / cr:.1f}x")


if __name__ == "__main__":
    main()
