"""Command-line entry point.

Commands: reduce, check laws, check confluence, orthogonal, critical-pairs,
lambda confluence. Reports go to stdout (text, or JSON with --json); logs
go to stderr. Exit codes: 0 all verdicts pass, 1 some verdict fails,
2 usage, parse or input error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from collections.abc import Callable, Sequence

from dotenv import load_dotenv
from pydantic import ValidationError

# Module-level settings below read the environment at import time.
load_dotenv()

import structlog

from relrewrite.api import commands
from relrewrite.api.schemas import CommandReport, Timing
from relrewrite.core.lam import LambdaCapError, ScopeError
from relrewrite.core.ops import RuleEmbeddingError
from relrewrite.core.reduce import MODES
from relrewrite.core.rel import FixpointDivergenceError, NonMonotoneError
from relrewrite.core.term import TermError
from relrewrite.core.universe import UniverseTooLargeError
from relrewrite.data.loader import LambdaSyntaxError, TrsSemanticError, TrsSyntaxError

logger = structlog.get_logger(__name__)

LOG_LEVELS = ("debug", "info", "warning", "error")

# Input problems: reported as exit code 2.
INPUT_ERRORS: tuple[type[Exception], ...] = (
    TrsSyntaxError,
    TrsSemanticError,
    LambdaSyntaxError,
    TermError,
    ScopeError,
    UniverseTooLargeError,
    LambdaCapError,
    RuleEmbeddingError,
    FileNotFoundError,
    commands.CommandInputError,
    ValidationError,
)

# Internal invariant violations: also exit 2, logged as errors.
ENGINE_ERRORS: tuple[type[Exception], ...] = (NonMonotoneError, FixpointDivergenceError)


def configure_logging(level: str | None = None) -> None:
    """Route structlog output to stderr at the configured level."""
    name = (level or os.environ.get("RELWRITE_LOG_LEVEL", "warning")).lower()
    renderer = (
        structlog.processors.JSONRenderer()
        if os.environ.get("RELWRITE_LOG_FORMAT", "console") == "json"
        else structlog.dev.ConsoleRenderer(colors=False)
    )
    structlog.configure(
        processors=[
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(
            getattr(logging, name.upper(), logging.WARNING)
        ),
        # sys.stderr is resolved per message, not at configure time.
        logger_factory=lambda *_: structlog.PrintLogger(file=sys.stderr),
        cache_logger_on_first_use=False,
    )


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _natural(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit a JSON report")
    common.add_argument("--timing", action="store_true", help="include elapsed time")
    common.add_argument("--log-level", choices=LOG_LEVELS, default=None)

    with_file = argparse.ArgumentParser(add_help=False)
    with_file.add_argument(
        "--file", default="add", help="TRS file, or a bundled system name (default: add)"
    )

    with_depth = argparse.ArgumentParser(add_help=False)
    with_depth.add_argument("--depth", type=_positive, default=3, help="universe depth bound")

    parser = argparse.ArgumentParser(
        prog="relrewrite",
        description="Relational rewriting: reduction, laws and confluence checks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    reduce = sub.add_parser("reduce", parents=[common, with_file], help="reducts of a term")
    reduce.add_argument("--term", required=True)
    reduce.add_argument("--mode", choices=MODES, default="parallel")
    reduce.add_argument("--steps", type=_positive, default=1)
    reduce.add_argument("--raw-ground", action="store_true",
                        help="contract literal rule left-hand sides only")
    reduce.set_defaults(handler=lambda a: commands.reduce_command(
        a.file, a.term, a.mode, a.steps, a.raw_ground))

    check = sub.add_parser("check", help="law suite and confluence techniques")
    check_sub = check.add_subparsers(dest="check_command", required=True)

    laws = check_sub.add_parser("laws", parents=[common, with_file, with_depth])
    laws.add_argument("--trials", type=_positive, default=100)
    laws.add_argument("--seed", type=_natural, default=0)
    laws.set_defaults(handler=lambda a: commands.check_laws_command(
        a.file, a.depth, a.trials, a.seed))

    confluence = check_sub.add_parser("confluence", parents=[common, with_file, with_depth])
    confluence.add_argument("--technique", choices=commands.TECHNIQUES, required=True)
    confluence.set_defaults(handler=lambda a: commands.check_confluence_command(
        a.file, a.technique, a.depth))

    orthogonal = sub.add_parser("orthogonal", parents=[common, with_file, with_depth],
                                help="orthogonality conditions")
    orthogonal.set_defaults(handler=lambda a: commands.orthogonal_command(a.file, a.depth))

    pairs = sub.add_parser("critical-pairs", parents=[common, with_file],
                           help="critical pairs and left-linearity")
    pairs.set_defaults(handler=lambda a: commands.critical_pairs_command(a.file))

    lam = sub.add_parser("lambda", help="β-reduction on de Bruijn terms")
    lam_sub = lam.add_subparsers(dest="lambda_command", required=True)
    lam_confluence = lam_sub.add_parser("confluence", parents=[common])
    lam_confluence.add_argument("--size", type=_positive, required=True)
    lam_confluence.add_argument("--scope", type=_natural, default=0)
    lam_confluence.add_argument("--mode", choices=commands.LAMBDA_MODES, default="parallel")
    lam_confluence.set_defaults(handler=lambda a: commands.lambda_confluence_command(
        a.size, a.scope, a.mode))

    return parser


def _execute(handler: Callable[[argparse.Namespace], CommandReport],
             args: argparse.Namespace) -> CommandReport:
    start = time.monotonic()
    report = handler(args)
    if args.timing:
        report.timing = Timing(elapsed_ms=int((time.monotonic() - start) * 1000))
    return report


def run(argv: Sequence[str] | None = None) -> int:
    """Parse arguments, run one command and print its report.

    Returns:
        The process exit code.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2

    configure_logging(args.log_level)
    try:
        report = _execute(args.handler, args)
    except INPUT_ERRORS as exc:
        logger.warning("cli.input_error", error=str(exc), kind=type(exc).__name__)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ENGINE_ERRORS as exc:
        logger.error("cli.engine_error", error=str(exc), kind=type(exc).__name__)
        print(f"error: {exc}", file=sys.stderr)
        return 2

    print(report.to_json() if args.json else report.to_text())
    return 0 if report.passed else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
