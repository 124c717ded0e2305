"""Command-line interface.

Subcommands: ``generate`` writes a synthetic dataset to files,
``solve`` fits a single penalized-covariance instance from a CSV sample
covariance, ``sweep`` runs a benchmark plan and writes report CSVs.
Exit codes: 0 success, 1 usage or input error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import bench
from .cd import solve_cd
from .core import SolverConfig
from .ecm import solve_ecm
from .matrixio import read_matrix, write_matrix
from .synthetic import MODEL_KINDS, ModelSpec, save_dataset

USAGE_ERROR = 1
NUMERICAL_ERROR = 2


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad arguments; this CLI reserves 2 for
    numerical failures, so usage errors exit 1 instead."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _build_parser():
    parser = _Parser(
        prog="covlasso",
        description="sparse covariance estimation: synthetic datasets, "
        "single solves, and benchmark sweeps",
    )
    sub = parser.add_subparsers(dest="command", metavar="{generate,solve,sweep}")

    gen = sub.add_parser("generate", parents=[], help="write a synthetic dataset to files")
    gen.add_argument("--model", required=True, choices=MODEL_KINDS)
    gen.add_argument("--p", required=True, type=int)
    gen.add_argument("--n", required=True, type=int)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out-dir", required=True)

    slv = sub.add_parser("solve", help="fit one instance from a sample covariance CSV")
    slv.add_argument("--input", required=True, help="sample covariance matrix CSV")
    slv.add_argument("--rho", required=True, type=float, help="shrinkage parameter (>= 0)")
    slv.add_argument("--solver", default="cd", choices=("cd", "ecm"))
    slv.add_argument("--init", default="full",
                     help="full | diag | custom:PATH (default: full)")
    slv.add_argument("--tol", type=float, default=1e-3,
                     help="objective-change stopping threshold (default: 1e-3)")
    slv.add_argument("--max-iters", type=int, default=500,
                     help="outer iteration cap (default: 500)")
    slv.add_argument("--out", required=True, help="output CSV for the estimate")

    swp = sub.add_parser("sweep", help="run a benchmark plan and write report CSVs")
    swp.add_argument("--plan", required=True, help="JSON plan file")
    swp.add_argument("--out-dir", required=True)

    # intentionally undocumented: brute-force verification of the solvers
    ver = sub.add_parser("verify")
    ver.add_argument("--pairs", type=int, default=1000)
    ver.add_argument("--instances", type=int, default=10)
    ver.add_argument("--seed", type=int, default=0)

    return parser


def _cmd_generate(args):
    spec = ModelSpec(kind=args.model, p=args.p, n=args.n, seed=args.seed)
    save_dataset(args.out_dir, spec)
    print(f"wrote {args.out_dir}/Y.csv, sigma_true.csv, meta.txt "
          f"({spec.kind}, p={spec.p}, n={spec.n}, seed={spec.seed})")
    return 0


def _solver_config(args):
    init = args.init
    init_matrix = None
    if init.startswith("custom:"):
        init_matrix = read_matrix(init.split(":", 1)[1], name="init matrix")
        init = "custom"
    elif init == "full":
        init = "sample"
    elif init != "diag":
        raise ValueError(f"--init must be full, diag or custom:PATH, got {args.init!r}")
    return SolverConfig(outer_tol=args.tol, max_outer_iters=args.max_iters,
                        init=init, init_matrix=init_matrix)


def _cmd_solve(args):
    if args.rho < 0:
        raise ValueError("--rho must be >= 0")
    s = read_matrix(args.input, name="input matrix")
    config = _solver_config(args)
    solve = solve_cd if args.solver == "cd" else solve_ecm
    result = solve(s, args.rho, config)
    write_matrix(args.out, result.sigma_hat)
    status = "converged" if result.converged else "NOT converged"
    print(f"{args.solver} {status} in {result.outer_iters} iterations: "
          f"objective {result.objective_trace[-1]:.6f}, "
          f"offdiag nonzero fraction {result.nonzero_fraction:.4f}, "
          f"{result.wall_time:.3f}s; wrote {args.out}")
    return 0


def _cmd_sweep(args):
    plan = bench.load_plan(args.plan)
    records = bench.run_experiment(plan)
    paths = bench.emit_report(records, args.out_dir)
    failures = sum(1 for r in records if r.error)
    print(f"{len(records)} cells ({failures} failed); reports:")
    for name, path in paths.items():
        print(f"  {name}: {path}")
    return 0


def _cmd_verify(args):
    from .cd import variance_update
    from .core import objective, sample_covariance
    from .oracle import brute_force_minimize, check_stationarity, oracle_variance_update

    rng = np.random.default_rng(args.seed)
    ok = True

    worst = 0.0
    for _ in range(args.pairs):
        a = rng.uniform(1e-6, 10.0)
        rho = rng.uniform(0.0, 5.0)
        worst = max(worst, abs(variance_update(a, rho) - oracle_variance_update(a, rho)))
    good = worst <= 1e-8
    ok &= good
    print(f"[{'PASS' if good else 'FAIL'}] closed-form vs golden-section variance update: "
          f"max |diff| = {worst:.3e} over {args.pairs} pairs (tolerance 1e-8)")

    cfg = SolverConfig(outer_tol=1e-10, max_outer_iters=2000)
    worst_gap = -np.inf
    worst_viol = np.inf
    for k in range(args.instances):
        y = rng.standard_normal((12, 2))
        s = sample_covariance(y)
        rho = (0.05, 0.2, 1.0)[k % 3]
        result = solve_cd(s, rho, cfg)
        report = brute_force_minimize(s, rho)
        worst_gap = max(worst_gap, objective(result.sigma_hat, s, rho) - report.best_value)
        worst_viol = min(worst_viol, check_stationarity(result.sigma_hat, s, rho))
    good = worst_gap <= 1e-3
    ok &= good
    print(f"[{'PASS' if good else 'FAIL'}] cd vs brute-force grid (p=2): "
          f"max objective gap = {worst_gap:.3e} over {args.instances} instances (tolerance 1e-3)")
    good = worst_viol >= -1e-4
    ok &= good
    print(f"[{'PASS' if good else 'FAIL'}] stationarity of cd solutions: "
          f"most negative directional derivative = {worst_viol:.3e} (tolerance -1e-4)")

    return 0 if ok else NUMERICAL_ERROR


_COMMANDS = {
    "generate": _cmd_generate,
    "solve": _cmd_solve,
    "sweep": _cmd_sweep,
    "verify": _cmd_verify,
}


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse already printed its message; surface the code (--help
        # exits 0, bad arguments exit 1 via _Parser.error)
        return exc.code
    if args.command is None:
        parser.print_help()
        return USAGE_ERROR
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"covlasso {args.command}: error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"covlasso {args.command}: numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
