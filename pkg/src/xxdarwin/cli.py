"""Command line entry point: ``xxdarwin run|oracle|list-experiments``.

Exit codes: 0 success, 2 invalid config or strict degeneracy, 3 BLP grid not
converged, 4 oracle deviation above tolerance.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .experiments import (
    EXPERIMENTS,
    ORACLE_TOL,
    ConfigError,
    OracleDeviation,
    StrictDegeneracyError,
    load_config,
    run_experiment,
    run_oracle_suite,
)
from .nonmarkov import ConvergenceError

EXIT_OK, EXIT_INVALID, EXIT_CONVERGENCE, EXIT_ORACLE = 0, 2, 3, 4

log = logging.getLogger("xxdarwin")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="xxdarwin", description=__doc__.splitlines()[0])
    p.add_argument("--out", default="results", help="output directory (default: results)")
    p.add_argument("--workers", type=int, default=1, help="worker threads")
    p.add_argument("--strict", action="store_true", help="treat degenerate sector ground levels as errors")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("config", type=Path)
    orc = sub.add_parser("oracle", help="cross-check every path against dense brute force")
    orc.add_argument("--max-n", type=int, default=6)
    orc.add_argument("--tol", type=float, default=ORACLE_TOL)
    sub.add_parser("list-experiments", help="print the available recipes")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.workers < 1:
        print("error: --workers must be at least 1", file=sys.stderr)
        return EXIT_INVALID

    if args.command == "list-experiments":
        for name, desc in EXPERIMENTS.items():
            print(f"{name:8s} {desc}")
        return EXIT_OK

    if args.command == "oracle":
        try:
            table = run_oracle_suite(args.max_n, args.tol, args.workers)
        except ConfigError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INVALID
        csv_path, _ = table.write(args.out, "oracle")
        sys.stdout.write(table.csv_text())
        worst = table.metadata["max_abs_dev"]
        if worst > args.tol:
            print(f"oracle deviation {worst:.3e} exceeds {args.tol:.1e}", file=sys.stderr)
            return EXIT_ORACLE
        log.info("wrote %s", csv_path)
        return EXIT_OK

    try:
        cfg = load_config(args.config)
        table = run_experiment(cfg, args.out, workers=args.workers, strict=args.strict or cfg.strict)
    except (ConfigError, StrictDegeneracyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except OracleDeviation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ORACLE
    print(f"{cfg.label}: {len(table.rows)} rows -> {Path(args.out) / (cfg.label + '.csv')}")
    return EXIT_OK
