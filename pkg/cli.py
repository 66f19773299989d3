"""Command line entry point: sequence, verdict, asymp and report subcommands.

Exit codes: 0 success, 2 config error, 3 numeric or axiom precondition error.
"""

import argparse
import json
import logging
import sys
from typing import Any, Dict, List, Optional, Sequence

from analysis_service import analysis_service
from errors import ConfigError, QAError
from report_writer import write_report
from run_config import load_run_config
from settings import settings

logger = logging.getLogger(__name__)

COMMANDS = ("sequence", "verdict", "asymp", "report")


def _number_list(text: Optional[str], cast, field: str) -> Optional[List]:
    if text is None:
        return None
    try:
        return [cast(x.strip()) for x in text.strip().strip("[]").split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"--{field.replace('_', '-')} expects a comma separated list, got {text!r}", field=field) from None


def _common_arguments() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=None, help="JSON run configuration")
    common.add_argument("--out", type=str, default=None, help="Write the report here instead of stdout")
    common.add_argument("--format", type=str, choices=["json", "csv"], default=None)
    common.add_argument("--P", type=int, default=None, help="Index range for the sequence checks")
    common.add_argument("--a-max", type=float, default=None, help="Budget for the growth index search")
    common.add_argument("--gamma", type=str, default=None, help="Normalized openings, e.g. 0.5,1.0")
    common.add_argument("--gamma-tilde", type=float, default=None, help="Opening of the inner polysector")
    common.add_argument("--fixture", type=str, default=None, help="Built-in fixture for asymp")
    common.add_argument("--n", type=int, default=None, help="Number of variables for the fixture")
    common.add_argument("--D", type=int, default=None, help="Depth of the total family")
    common.add_argument("--orders", type=str, default=None, help="Diagonal orders k for the remainder table")
    common.add_argument("--verbose", action="store_true")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qa-classes",
        description="Quasi-analyticity checks for Carleman ultraholomorphic classes on polysectors",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common_arguments()
    sub.add_parser("sequence", parents=[common], help="Axioms, growth index and Ostrowski table of a weight sequence")
    sub.add_parser("verdict", parents=[common], help="Quasi-analyticity verdicts for a sequence and a polysector")
    sub.add_parser("asymp", parents=[common], help="Strong asymptotic development checks on a fixture")
    sub.add_parser("report", parents=[common], help="Every section the configuration allows")
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    return {
        "command": args.command,
        "P": args.P,
        "a_max": args.a_max,
        "gamma": _number_list(args.gamma, float, "gamma"),
        "gamma_tilde": args.gamma_tilde,
        "fixture": args.fixture,
        "n": args.n,
        "D": args.D,
        "orders": _number_list(args.orders, int, "orders"),
        "output": args.out,
        "format": args.format,
    }


def _print_error(error: QAError) -> None:
    print(json.dumps({"error": error.to_dict()}, indent=2, default=str), file=sys.stderr)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else getattr(logging, settings.log_level.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    try:
        config = load_run_config(args.config, _overrides(args))
        report = analysis_service.run(config, args.command)
    except ConfigError as e:
        logger.error(f"Config error ({e.field}): {e.message}")
        _print_error(e)
        return e.exit_code
    except QAError as e:
        logger.error(f"{type(e).__name__}: {e.message}")
        _print_error(e)
        return e.exit_code

    text = write_report(report, config.output, config.format)
    if not config.output:
        sys.stdout.write(text)
    if report["errors"]:
        logger.warning(f"{len(report['errors'])} section(s) refused: {[e['path'] for e in report['errors']]}")
        return QAError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
