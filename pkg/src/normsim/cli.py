"""Command-line entry point.

Exit codes: 0 success, 1 validation failure, 2 runtime contract violation.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .core import ContractViolation
from .norms import NormError, canonicalize, parse_norms
from .scenario import (
    ComparisonError,
    ScenarioError,
    compare,
    load_scenario,
    resolve_scenario_path,
    run,
    write_outputs,
    write_report,
)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_RUNTIME = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="normsim", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one scenario")
    p.add_argument("--scenario", required=True, help="scenario YAML file or bundled scenario name")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--steps", type=int, help="override the number of steps")
    p.add_argument("--out", required=True, type=Path, help="output directory")
    p.add_argument("--log-available", action="store_true", help="write available.csv with every gated action set")

    p = sub.add_parser("compare", help="run a baseline and a policy variant and diff their outcomes")
    p.add_argument("--baseline", required=True)
    p.add_argument("--variant", required=True)
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("validate", help="check a norm file")
    p.add_argument("--norms", required=True, type=Path)

    p = sub.add_parser("parse-norms", help="write the canonical form of a norm file")
    p.add_argument("--norms", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    return parser


def _read_norms(path: Path):
    return parse_norms(path.read_text(encoding="utf-8"))


def main(argv: Optional[List[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "validate":
            norms = _read_norms(args.norms)
            print(f"{args.norms}: {len(norms)} norm(s) OK")
        elif args.command == "parse-norms":
            text = canonicalize(_read_norms(args.norms))
            args.out.parent.mkdir(parents=True, exist_ok=True)
            args.out.write_text(text, encoding="utf-8")
        elif args.command == "run":
            config = load_scenario(resolve_scenario_path(args.scenario)).with_overrides(args.seed, args.steps)
            result = run(config, log_available=args.log_available)
            write_outputs(result, args.out)
        elif args.command == "compare":
            baseline = load_scenario(resolve_scenario_path(args.baseline))
            variant = load_scenario(resolve_scenario_path(args.variant))
            write_report(compare(baseline, variant), args.out)
    except (NormError, ScenarioError, ComparisonError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ContractViolation as exc:
        print(f"contract violation: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
