"""Command handlers behind the CLI.

Each handler loads its inputs, delegates to the core modules and returns a
CommandReport. Handlers never print and never exit; library exceptions
propagate to the entry point, which maps them to exit codes.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from typing import Any

import structlog

from relrewrite.api.schemas import CommandReport, Verdict
from relrewrite.core import lam
from relrewrite.core.analyze import (
    CheckReport,
    critical_pairs,
    kleisli_premise_check,
    lambda_checks,
    left_linear,
    orthogonality_check,
    parallel_moves_check,
    tml_check,
)
from relrewrite.core.laws import LawOutcome, LawSuiteConfig, law_suite
from relrewrite.core.reduce import Mode, reduce_image, reducts_within, stepper
from relrewrite.core.universe import universe_for
from relrewrite.data.loader import load_trs, parse_term

logger = structlog.get_logger(__name__)

TECHNIQUES = ("parallel-moves", "tml", "kleisli")
LAMBDA_MODES = ("parallel", "full")


class CommandInputError(ValueError):
    """A command argument outside the accepted range or choices."""


def format_witness(witness: Sequence[Any] | None) -> str | None:
    if witness is None:
        return None
    return "(" + ", ".join(str(item) for item in witness) + ")"


def verdict_from_check(report: CheckReport) -> Verdict:
    details: dict[str, str | int | bool] = {"checked": report.checked}
    if report.note:
        details["note"] = report.note
    return Verdict(
        name=report.name,
        anchor=report.anchor,
        passed=report.passed,
        witness=format_witness(report.witness),
        details=details,
        gating=report.gating,
    )


def verdict_from_law(outcome: LawOutcome) -> Verdict:
    details: dict[str, str | int | bool] = {"margin": outcome.margin, "trials": outcome.trials}
    if outcome.note:
        details["note"] = outcome.note
    witness = None
    if outcome.counterexample is not None:
        witness = format_witness(outcome.counterexample.witness)
        details["trial"] = outcome.counterexample.trial
        for name, pairs in outcome.counterexample.inputs.items():
            details[f"input {name}"] = "; ".join(pairs)
    return Verdict(
        name=outcome.name,
        anchor=outcome.anchor,
        passed=outcome.passed,
        witness=witness,
        details=details,
        gating=outcome.gating,
    )


def _verdicts(reports: Iterable[CheckReport]) -> list[Verdict]:
    return [verdict_from_check(r) for r in reports]


def reduce_command(
    file: str, term: str, mode: Mode, steps: int = 1, raw_ground: bool = False
) -> CommandReport:
    """Reducts of a term in at most `steps` steps of the chosen reduction."""
    if steps < 1:
        raise CommandInputError(f"--steps must be at least 1, got {steps}")
    es = load_trs(file).esystem
    t = parse_term(term, es)
    instances = not raw_ground
    if steps == 1:
        reducts = reduce_image(t, es, mode, instances)
    else:
        reducts = reducts_within(t, stepper(es, mode, instances), steps)
    logger.info("commands.reduced", term=str(t), mode=mode, steps=steps, reducts=len(reducts))
    return CommandReport(
        command="reduce",
        inputs={"file": file, "term": str(t), "mode": mode, "steps": steps},
        results=sorted(str(s) for s in reducts),
    )


def check_laws_command(
    file: str, depth: int = 3, trials: int = 100, seed: int = 0
) -> CommandReport:
    """Run the law suite."""
    es = load_trs(file).esystem
    config = LawSuiteConfig(depth=depth, trials=trials, seed=seed)
    report = law_suite(es, config)
    return CommandReport(
        command="check laws",
        inputs={"file": file, "depth": depth, "trials": trials, "seed": seed},
        verdicts=[verdict_from_law(o) for o in report.outcomes],
    )


def check_confluence_command(file: str, technique: str, depth: int = 3) -> CommandReport:
    """Check the hypotheses and conclusion of a confluence technique."""
    es = load_trs(file).esystem
    universe = universe_for(es, depth)
    match technique:
        case "parallel-moves":
            reports = parallel_moves_check(es, universe)
        case "tml":
            reports = tml_check(es, universe)
        case "kleisli":
            reports = kleisli_premise_check(es, universe) + kleisli_premise_check(
                es, universe, weak=True
            )
        case _:
            raise CommandInputError(f"unknown technique {technique!r}")
    return CommandReport(
        command="check confluence",
        inputs={"file": file, "technique": technique, "depth": depth},
        verdicts=_verdicts(reports),
    )


def orthogonal_command(file: str, depth: int = 3) -> CommandReport:
    """Both orthogonality conditions over the depth-bounded universe."""
    es = load_trs(file).esystem
    universe = universe_for(es, depth)
    return CommandReport(
        command="orthogonal",
        inputs={"file": file, "depth": depth},
        verdicts=_verdicts(orthogonality_check(es, universe)),
    )


def critical_pairs_command(file: str) -> CommandReport:
    """List critical pairs and report left-linearity."""
    es = load_trs(file).esystem
    pairs = critical_pairs(es)
    verdicts = [
        Verdict(
            name="left-linear",
            anchor="no left-hand side repeats a variable",
            passed=left_linear(es),
        ),
        Verdict(
            name="no-critical-pairs",
            anchor="no rule overlaps another at a non-variable position",
            passed=not pairs,
            witness=str(pairs[0]) if pairs else None,
            details={"count": len(pairs)},
        ),
    ]
    return CommandReport(
        command="critical-pairs",
        inputs={"file": file},
        verdicts=verdicts,
        results=[str(cp) for cp in pairs],
    )


def lambda_confluence_command(size: int, scope: int = 0, mode: str = "parallel") -> CommandReport:
    """Diamond checks for β over every term up to a size bound."""
    if mode not in LAMBDA_MODES:
        raise CommandInputError(f"unknown lambda mode {mode!r}")
    reports = lambda_checks(mode, scope, size)
    verdicts = []
    for report in reports:
        verdict = verdict_from_check(report)
        peak = report.witness[0] if report.witness else None
        if not report.passed and isinstance(peak, (lam.Lam, lam.App)):
            normal = lam.lam_normalize(peak)
            if normal is not None:
                verdict.details["peak normal form"] = lam.format_lam(normal)
        verdicts.append(verdict)
    return CommandReport(
        command="lambda confluence",
        inputs={"size": size, "scope": scope, "mode": mode},
        verdicts=verdicts,
    )
