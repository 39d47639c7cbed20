"""Command-line entry point: ``fracpow <command> [options]``."""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from . import experiments, fem, reference
from .frac_apply import apply_frac_inverse, default_threads
from .quadrature import make_scheme


def _numbers(text):
    return [float(Fraction(tok)) for tok in text.split(",") if tok.strip()]


def _ints(text):
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _flatten(values, default):
    if not values:
        return list(default)
    return [v for group in values for v in group]


def _emit(text, out):
    if out:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _scheme_from_args(args, beta):
    if args.scheme == "exp":
        return make_scheme("exp", beta, k=args.k)
    return make_scheme(args.scheme, beta, N=args.N, r=args.r)


def cmd_table(args, kind):
    betas = _flatten(args.beta, experiments.TABLE_BETAS)
    if kind == "exp":
        sizes = _flatten(args.k_list, experiments.TABLE3_STEPS)
    else:
        default = experiments.TABLE1_SIZES if kind == "rect" else experiments.TABLE2_SIZES
        sizes = _flatten(args.N_list, default)
    rows = experiments.table_rows(kind, betas, sizes, r=args.r, lambda0=args.lambda0)
    _emit(experiments.to_csv(rows, experiments.TABLE_COLUMNS), args.out)
    return 0


def cmd_solve(args):
    beta = _flatten(args.beta, [0.5])[0]
    n = args.n
    mesh = fem.build_mesh(n)
    pair = fem.assemble(mesh)
    config = fem.SolverConfig(rel_tolerance=args.tol)
    if args.f == "checkerboard":
        if n % 2:
            raise ValueError("the checkerboard source needs an even n so the mesh resolves x=1/2, y=1/2")
        f = fem.l2_project(mesh, pair, reference.checkerboard, config)
    elif args.f == "zero":
        f = fem.Field(mesh, [0.0] * mesh.ndof)
    else:
        f = fem.load_field(args.f)
        if f.mesh.n != n:
            raise ValueError(f"field file is on an n={f.mesh.n} mesh, expected n={n}")
    scheme = _scheme_from_args(args, beta)
    u, report = apply_frac_inverse(pair, scheme, f, config, args.threads)
    if args.out:
        fem.export_field(u, args.out)
    print(f"scheme {report.scheme}", file=sys.stderr)
    print(f"nsys {report.nsys_executed} max_cg_iterations {report.max_cg_iterations} "
          f"max_relative_residual {report.max_relative_residual:.3e} "
          f"wall_time {report.wall_time:.3f}s threads {report.threads}", file=sys.stderr)
    return 0


def cmd_convergence(args):
    betas = _flatten(args.beta, experiments.AROC_BETAS)
    meshes = _flatten(args.mesh, experiments.DEFAULT_MESHES)
    if args.scheme != "exp":
        raise ValueError("the convergence study uses the exponential rule (--scheme exp)")
    if any(n % 2 for n in meshes):
        raise ValueError("meshes must be even")
    config = fem.SolverConfig(rel_tolerance=args.tol)
    cache = experiments._MeshCache(config)
    rows, summaries = [], []
    for beta in betas:
        s = experiments.convergence_study(beta, meshes, k=args.k, config=config,
                                          threads=args.threads, cache=cache)
        rows.extend(r.as_dict() for r in s.rows)
        summaries.append(s.as_dict())
        print(f"beta={beta:g} AROC={s.aroc:.3f} predicted={s.predicted_rate:.2f} k={s.k:.4g}",
              file=sys.stderr)
    text = experiments.to_csv(rows, experiments.CONVERGENCE_COLUMNS)
    text += "\n" + experiments.to_csv(summaries, experiments.SUMMARY_COLUMNS)
    _emit(text, args.out)
    return 0


def cmd_oracle_check(args):
    betas = _flatten(args.beta, [0.5])
    ok = True
    lines = ["scheme,max_error,bound,rigorous,passed"]
    for beta in betas:
        scheme = _scheme_from_args(args, beta)
        res = experiments.oracle_check(scheme, n=args.n, samples=args.samples, threads=args.threads)
        ok &= res.passed
        lines.append(f"\"{res.scheme}\",{res.max_error:.12g},{res.bound:.12g},"
                     f"{str(res.rigorous).lower()},{str(res.passed).lower()}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0 if ok else 1


def build_parser():
    p = argparse.ArgumentParser(prog="fracpow", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--beta", type=_numbers, action="append",
                        help="fractional exponent(s), comma separated")
        sp.add_argument("--out", help="output path (default: stdout)")
        sp.add_argument("--threads", type=int, default=None,
                        help="worker threads for resolvent solves (default: $FRACPOW_THREADS or 1)")
        sp.add_argument("--r", type=int, default=2, help="Gauss points per cell")
        sp.add_argument("--tol", type=float, default=1e-12, help="CG relative tolerance")

    for name, kind in (("table1", "rect"), ("table2", "gauss"), ("table3", "exp")):
        sp = sub.add_parser(name, help=f"sup-norm scalar errors of the {kind} rule")
        common(sp)
        if kind == "exp":
            sp.add_argument("--k", dest="k_list", type=_numbers, action="append",
                            help="step sizes, e.g. 1,1/2,1/3")
        else:
            sp.add_argument("--N", dest="N_list", type=_ints, action="append", help="rule sizes")
        sp.add_argument("--lambda0", type=float, default=10.0)
        sp.set_defaults(func=lambda a, kind=kind: cmd_table(a, kind))

    def scheme_opts(sp, default="exp"):
        sp.add_argument("--scheme", choices=("rect", "gauss", "exp"), default=default)
        sp.add_argument("--N", type=int, default=None, help="rule size for rect/gauss")
        sp.add_argument("--k", type=lambda s: float(Fraction(s)), default=None,
                        help="step size for exp")

    sp = sub.add_parser("solve", help="apply the discrete fractional inverse to a source")
    common(sp)
    scheme_opts(sp)
    sp.add_argument("--n", type=int, default=16, help="squares per side")
    sp.add_argument("--f", default="checkerboard", help="checkerboard, zero, or a field file")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("convergence", help="L2 convergence against the exact sine series")
    common(sp)
    scheme_opts(sp)
    sp.add_argument("--mesh", type=_ints, action="append", help="mesh sizes, e.g. 8,16,32,64")
    sp.set_defaults(func=cmd_convergence)

    sp = sub.add_parser("oracle-check", help="compare the quadrature operator with the eigen oracle")
    common(sp)
    scheme_opts(sp)
    sp.add_argument("--n", type=int, default=16)
    sp.add_argument("--samples", type=int, default=10)
    sp.set_defaults(func=cmd_oracle_check)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", None) is None and hasattr(args, "threads"):
        args.threads = default_threads()
    if getattr(args, "scheme", None) == "exp" and args.command != "convergence" and args.k is None:
        args.k = 1 / 3
    if getattr(args, "scheme", None) in ("rect", "gauss") and args.N is None:
        args.N = 255 if args.scheme == "rect" else 4
    try:
        return args.func(args)
    except (ValueError, fem.SolverError, OSError) as exc:
        print(f"fracpow {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
