"""Command-line entry point.

Subcommands: run, sweep, covariance, gauge, residual. Exit codes: 0 on
success, 1 for configuration/validation problems, 2 for numerical errors
detected during a run. NQG_THREADS is the fallback for --threads.
"""

from __future__ import annotations

import argparse
import os
import sys

from .errors import NqgError, ScenarioError
from .runner import do_covariance, do_gauge, do_residual, do_run, do_sweep

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2


def _add_common(sub):
    sub.add_argument("--config", required=True, help="scenario file (INI)")
    sub.add_argument("--out", default=None, help="output directory")
    sub.add_argument(
        "--threads",
        type=int,
        default=None,
        help="worker threads (default: NQG_THREADS or 1)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nqglab",
        description=(
            "Two-branch gravitational-decoherence experiments on a periodic "
            "lattice: evolve, sweep, deform, realign, and diagnose coordinate "
            "conditions."
        ),
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    run = subparsers.add_parser("run", help="one double-slit experiment")
    _add_common(run)

    swp = subparsers.add_parser("sweep", help="rho_trans over a parameter range")
    _add_common(swp)
    swp.add_argument(
        "--param",
        required=True,
        choices=["M", "t_total", "separation", "eps"],
        help="which scenario parameter to sweep",
    )
    swp.add_argument(
        "--values", required=True, help="comma-separated list of values"
    )

    cov = subparsers.add_parser(
        "covariance", help="overlap behaviour under deformations"
    )
    _add_common(cov)
    cov.add_argument(
        "--independent",
        action="store_true",
        help="deform the branches with two different maps (witness mode)",
    )

    gauge = subparsers.add_parser(
        "gauge", help="rho_trans per realignment prescription"
    )
    _add_common(gauge)

    res = subparsers.add_parser(
        "residual", help="harmonic-condition residual of a metric family"
    )
    _add_common(res)
    return parser


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("NQG_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ScenarioError(f"NQG_THREADS must be an integer, got {env!r}")
    return 1


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help and 2 for usage errors; usage problems
        # are validation failures under this tool's exit-code contract
        return 0 if exc.code in (0, None) else EXIT_VALIDATION
    try:
        threads = _threads(args)
        if args.command == "run":
            _, summary = do_run(args.config, args.out, threads)
        elif args.command == "sweep":
            values = [float(tok) for tok in args.values.split(",") if tok.strip()]
            if not values:
                raise ScenarioError("--values is empty")
            _, summary = do_sweep(args.config, args.param, values, args.out, threads)
        elif args.command == "covariance":
            _, summary = do_covariance(args.config, args.independent, args.out, threads)
        elif args.command == "gauge":
            _, summary = do_gauge(args.config, args.out, threads)
        else:
            _, summary = do_residual(args.config, args.out, threads)
    except ScenarioError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValueError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NqgError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(summary, end="")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
