"""Command-line entry point: ``axiverify {verify,falsify,convergence}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from axiverify.cli.config import ConfigError, RunConfig
from axiverify.cli.pipelines import (
    EXIT_CONFIG,
    EXIT_FAIL,
    EXIT_SOLVER,
    run_convergence,
    run_falsify,
    run_verify,
)
from axiverify.cli.report import ReportError, emit_report, emit_table
from axiverify.colehopf import TransformError
from axiverify.solver import SolverError

log = logging.getLogger("axiverify")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="axiverify", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("verify", "residuals of every equation for one case on one grid"),
        ("falsify", "correct vs erroneous phi-equation across grid levels"),
        ("convergence", "Laplace-solver error and observed order across grid levels"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", type=Path, help="key = value config file")
        p.add_argument("--out", type=Path, required=True, help="output directory")
        p.add_argument(
            "--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key"
        )
        p.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = RunConfig.load(args.config, args.set)
        if args.command == "verify":
            result = run_verify(cfg)
            paths = emit_report(result.report, result.csv, args.out, "verify")
            code = result.exit_code
            failed = [k for k, ok in result.report.passed.items() if not ok]
            if failed:
                log.warning("thresholds not met: %s", ", ".join(failed))
        elif args.command == "falsify":
            header, rows, summary, code = run_falsify(cfg)
            paths = emit_table(header, rows, summary, args.out, "falsify")
            print(f"verdict: {summary['verdict']}")
        else:
            header, rows, summary, code = run_convergence(cfg)
            paths = emit_table(header, rows, summary, args.out, "convergence")
    except (ConfigError, TransformError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ReportError as exc:
        print(f"report error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    for p in paths:
        print(p)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
