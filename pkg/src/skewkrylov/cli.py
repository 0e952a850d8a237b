"""Command-line entry point.

Exit codes: 0 when the experiment ran (solver breakdowns included),
2 for usage errors, 3 for I/O or parse errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import MatrixMarketError, SkewValidationError, UsageError
from .harness import SOLVERS, ExperimentConfig, run_experiment
from .problems import AdvectionConfig

EXIT_OK, EXIT_USAGE, EXIT_IO = 0, 2, 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skewkrylov", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    solve = sub.add_parser("solve", help="run one or more solvers on one system")
    solve.add_argument("--solver", required=True,
                       help=f"comma-separated list from: {', '.join(SOLVERS)}")
    solve.add_argument("--n1", type=int, default=20)
    solve.add_argument("--n2", type=int, default=20)
    solve.add_argument("--alpha", type=float, default=None,
                       help="shift (default 1.0 for generated problems; from the file otherwise)")
    solve.add_argument("--gamma", type=float, default=1.0)
    solve.add_argument("--tol", type=float, default=1e-8)
    solve.add_argument("--maxit", type=int, default=1000)
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--out", type=Path, default=Path("out"))
    solve.add_argument("--matrix", type=Path, help="Matrix Market file instead of a generated problem")
    solve.add_argument("--rhs", type=Path, help="right-hand side for --matrix")
    solve.add_argument("--audit-every", type=int, default=10)
    solve.add_argument("--debug-recurrences", action="store_true",
                       help="keep MRS3 vectors and report the W and xi reconstruction errors")
    return parser


def config_from_args(args) -> ExperimentConfig:
    solvers = tuple(s for s in args.solver.split(",") if s.strip())
    common = dict(solvers=solvers, out=args.out, tol=args.tol, maxit=args.maxit,
                  audit_every=args.audit_every, debug_recurrences=args.debug_recurrences)
    if args.matrix is not None:
        return ExperimentConfig(matrix_path=args.matrix, rhs_path=args.rhs, alpha=args.alpha, **common)
    alpha = 1.0 if args.alpha is None else args.alpha
    problem = AdvectionConfig(args.n1, args.n2, args.gamma, alpha, args.seed)
    return ExperimentConfig(problem=problem, **common)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = config_from_args(args)
        result = run_experiment(cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, MatrixMarketError, SkewValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    for name, s in result.summary["solvers"].items():
        line = f"{name:10s} {s['status']:14s}"
        report = result.reports.get(name)
        if report is not None:
            line += f" iterations={report.iterations:<5d} true_residual={report.true_final_residual:.3e}"
        print(line)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
