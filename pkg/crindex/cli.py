#!/usr/bin/env python3

import argparse
import sys
from pathlib import Path
from time import time
from typing import Any, Dict, Optional, Sequence

from loguru import logger

from crindex.analysis import DomainAnalysis, RunManifest
from crindex.config import DomainSpec, load_domain_config_file
from crindex.errors import (
    ConfigError,
    ConsistencyError,
    CrIndexError,
    ExpressionError,
    OracleError,
    PseudoconvexityError,
    SamplerStarvationError,
)
from crindex.oracle import Side, make_oracle
from crindex.report import export_csv, export_json, to_json
from crindex.selftest import run_selftest
from crindex.trivialization import optimize_trivialization

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_NOT_PSEUDOCONVEX = 3
EXIT_STARVATION = 4
EXIT_INCONSISTENT = 5


def _add_config_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("config", type=Path, help="Domain config (TOML)")
    parser.add_argument("--out", type=Path, help="Write the JSON report here instead of stdout")
    parser.add_argument("--seed", type=int, help="Override sampling.seed")
    parser.add_argument("--samples", type=int, help="Override sampling.count")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Estimate Diederich-Fornaess and Steinness indices of a domain from its boundary"
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true", help="Log debug output")
    verbosity.add_argument("--quiet", action="store_true", help="Only log warnings and errors")
    commands = parser.add_subparsers(dest="command", required=True)

    analyze = commands.add_parser("analyze", help="Run the full pipeline")
    _add_config_arguments(analyze)
    analyze.add_argument("--csv", type=Path, help="Write per-point thresholds as CSV")

    oracle = commands.add_parser("oracle", help="Run one plurisubharmonicity oracle")
    _add_config_arguments(oracle)
    oracle.add_argument(
        "--side", choices=[s.value for s in Side], default=Side.INTERIOR.value, help="Side of M"
    )
    oracle.add_argument("--gamma", type=float, required=True, help="Exponent to test")

    certify = commands.add_parser("certify", help="Consistency checks only")
    _add_config_arguments(certify)

    optimize = commands.add_parser("optimize", help="Search the conformal family")
    _add_config_arguments(optimize)
    optimize.add_argument("--objective", choices=["df", "s"], help="Quantity to improve")
    optimize.add_argument("--budget", type=int, help="Objective evaluations")
    optimize.add_argument("--csv", type=Path, help="Write per-point thresholds as CSV")

    selftest = commands.add_parser("selftest", help="Jet and rank-one validation suites")
    selftest.add_argument("--seed", type=int, default=0, help="Seed for the random instances")
    selftest.add_argument("--jet-trials", type=int, default=500)
    selftest.add_argument("--rank-one-trials", type=int, default=1000)
    selftest.add_argument("--out", type=Path, help="Write the JSON summary here")
    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    return build_parser().parse_args(argv)


def configure_logging(verbose: bool, quiet: bool) -> None:
    logger.remove()
    level = "DEBUG" if verbose else "WARNING" if quiet else "INFO"
    logger.add(sys.stderr, level=level)


def load_spec(args: argparse.Namespace) -> DomainSpec:
    spec = load_domain_config_file(args.config)
    return spec.with_overrides(seed=args.seed, count=args.samples)


def emit(data: Dict[str, Any], out: Optional[Path]) -> None:
    if out is None:
        print(to_json(data))
    else:
        export_json(data, out)


def run_analyze(args: argparse.Namespace) -> int:
    spec = load_spec(args)
    result = DomainAnalysis(spec, args.config).run()
    emit(result.to_dict(), args.out)
    if args.csv is not None:
        result.export_csv(args.csv)
    result.consistency.require(full=False)
    return EXIT_OK


def run_oracle(args: argparse.Namespace) -> int:
    spec = load_spec(args)
    start_time = time()
    verdict = make_oracle(spec, args.side).check(args.gamma)
    manifest = RunManifest(str(args.config), spec, duration=time() - start_time)
    emit({"manifest": manifest.to_dict(), "verdict": verdict.to_dict()}, args.out)
    return EXIT_OK


def run_certify(args: argparse.Namespace) -> int:
    spec = load_spec(args)
    result = DomainAnalysis(spec, args.config).certify()
    data = result.to_dict()
    emit(
        {key: data[key] for key in ("manifest", "oracles", "consistency")},
        args.out,
    )
    result.consistency.require()
    return EXIT_OK


def run_optimize(args: argparse.Namespace) -> int:
    spec = load_spec(args)
    analysis = DomainAnalysis(spec, args.config)
    start_time = time()
    coeffs, report = optimize_trivialization(
        spec, analysis.geometry, objective=args.objective, budget=args.budget
    )
    manifest = RunManifest(str(args.config), spec, duration=time() - start_time)
    emit(
        {
            "manifest": manifest.to_dict(),
            "objective": args.objective or spec.optimizer.objective,
            "coeffs": list(coeffs),
            "indices": report.to_dict(),
        },
        args.out,
    )
    if args.csv is not None:
        export_csv(report, spec.n, args.csv)
    return EXIT_OK


def run_selftest_command(args: argparse.Namespace) -> int:
    results = run_selftest(args.jet_trials, args.rank_one_trials, args.seed)
    ok = all(result.ok for result in results)
    emit({"ok": ok, "suites": [result.to_dict() for result in results]}, args.out)
    return EXIT_OK if ok else EXIT_INCONSISTENT


COMMANDS = {
    "analyze": run_analyze,
    "oracle": run_oracle,
    "certify": run_certify,
    "optimize": run_optimize,
    "selftest": run_selftest_command,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = parse_args(argv)
    configure_logging(args.verbose, args.quiet)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, ExpressionError, OracleError, FileNotFoundError) as e:
        logger.error(f"{e}")
        return EXIT_CONFIG
    except PseudoconvexityError as e:
        logger.error(f"{e}")
        return EXIT_NOT_PSEUDOCONVEX
    except SamplerStarvationError as e:
        logger.error(f"{e}")
        return EXIT_STARVATION
    except ConsistencyError as e:
        logger.error(f"{e}")
        return EXIT_INCONSISTENT
    except CrIndexError as e:
        logger.error(f"{e}")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
