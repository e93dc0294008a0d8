"""Confluence techniques and structural checks on E-systems.

Diamond and weak-confluence checks run on image enumerators. Orthogonality,
nesting and the Kleisli premise are inclusions between bounded relations;
pairs the bounded side misses because a witness term lies outside the
universe are settled by an arbiter that consults the unbounded enumerators.

Independent per-term checks run on a module-level thread pool (bounded by
RELWRITE_MAX_WORKERS) and are merged in input order.
"""

from __future__ import annotations

import atexit
import itertools
import os
from collections.abc import Callable, Hashable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Any, TypeVar

import numpy as np
import structlog

from relrewrite.core import lam
from relrewrite.core.ops import (
    barr_lift,
    barr_lift_lfp,
    compreff,
    ctx_closure,
    extensional,
    full_ext,
    ground_instances,
    howe_ext,
    parallel_ext,
    rel_subst,
    rule_rel,
)
from relrewrite.core.reduce import (
    MODES,
    Mode,
    full_image,
    ground_image,
    parallel_image,
    reachable,
    reduce_image,
    stepper,
)
from relrewrite.core.rel import Pair, Rel, compose, converse, identity, join, rtc
from relrewrite.core.sampling import random_rel
from relrewrite.core.term import (
    ESystem,
    Position,
    Rule,
    Term,
    Var,
    apply_subst,
    format_position,
    is_linear,
    positions,
    replace_at,
    subterm_at,
    unify,
    variables,
)
from relrewrite.core.universe import Universe

logger = structlog.get_logger(__name__)

MAX_WORKERS = int(os.environ.get("RELWRITE_MAX_WORKERS", "4"))
JOIN_STEPS = int(os.environ.get("RELWRITE_JOIN_STEPS", "6"))
_CHUNK = 256

_pool = ThreadPoolExecutor(max_workers=MAX_WORKERS)
atexit.register(_pool.shutdown, wait=False)

T = TypeVar("T")
W = TypeVar("W")
H = TypeVar("H", bound=Hashable)


@dataclass
class CheckReport:
    """Outcome of one property check.

    Attributes:
        name: Short identifier of the property.
        anchor: The property as a formula.
        passed: Whether the property held on everything checked.
        witness: Terms exhibiting the first failure, if any.
        checked: Number of items (terms, pairs or trials) examined.
        gating: False for properties that are recorded but never fail a run.
        note: Free-form remark, e.g. a precondition that was imposed.
    """
    name: str
    anchor: str
    passed: bool
    witness: tuple[Any, ...] | None = None
    checked: int = 0
    gating: bool = True
    note: str = ""


@dataclass(frozen=True)
class CriticalPair:
    """Two one-step reducts of a most general overlap.

    Attributes:
        peak: The overlapped term.
        left: Contraction with the outer rule at the root.
        right: Contraction with the inner rule at `position`.
        position: Where the inner left-hand side overlaps the outer one.
        rules: (outer, inner) rule indices, 1-based.
        unifier: Most general unifier of the overlap.
    """
    peak: Term
    left: Term
    right: Term
    position: Position
    rules: tuple[int, int]
    unifier: dict[str, Term] = field(hash=False, compare=False)

    def __str__(self) -> str:
        return (
            f"{self.left} <- {self.peak} -> {self.right} "
            f"(rules {self.rules[0]}/{self.rules[1]} at {format_position(self.position)})"
        )


def run_ordered(fn: Callable[[T], W], items: Sequence[T]) -> list[W]:
    """Apply fn to every item on the worker pool; results in input order."""
    results: dict[int, W] = {}
    futures = {_pool.submit(fn, item): i for i, item in enumerate(items)}
    for future in as_completed(futures):
        results[futures[future]] = future.result()
    return [results[i] for i in range(len(items))]


def first_failure(fn: Callable[[T], W | None], items: Sequence[T]) -> tuple[int, W] | None:
    """Lowest-index item whose check returns a witness, scanning in chunks."""
    for start in range(0, len(items), _CHUNK):
        chunk = items[start:start + _CHUNK]
        for offset, witness in enumerate(run_ordered(fn, chunk)):
            if witness is not None:
                return start + offset, witness
    return None


def _ordered(items: Iterable[H]) -> list[H]:
    return sorted(items, key=str)


def diamond_check(
    image: Callable[[H], Iterable[H]],
    terms: Sequence[H],
    name: str = "diamond",
    anchor: str = "a°;a ≤ a;a°",
) -> CheckReport:
    """Every peak s₁ ← t → s₂ closes in one step on each side.

    Args:
        image: One-step image function, total on terms and their reducts.
        terms: Sources to check, scanned in order.

    Returns:
        CheckReport whose witness is the first failing (t, s₁, s₂).
    """
    def peak_failure(t: H) -> tuple[H, H, H] | None:
        reducts = _ordered(image(t))
        images = {s: frozenset(image(s)) for s in reducts}
        for s1, s2 in itertools.combinations_with_replacement(reducts, 2):
            if not images[s1] & images[s2]:
                return t, s1, s2
        return None

    hit = first_failure(peak_failure, terms)
    if hit is None:
        logger.info("analyze.diamond_passed", name=name, terms=len(terms))
        return CheckReport(name, anchor, True, checked=len(terms))
    index, witness = hit
    logger.info("analyze.diamond_failed", name=name, peak=str(witness[0]))
    return CheckReport(name, anchor, False, witness=witness, checked=index + 1)


def weak_confluence_check(
    image: Callable[[H], Iterable[H]],
    terms: Sequence[H],
    steps: int | None = None,
    name: str = "weak-confluence",
    anchor: str = "a°;a ≤ a*;a*°",
) -> CheckReport:
    """Every one-step peak joins within `steps` further steps on each side."""
    bound = JOIN_STEPS if steps is None else steps

    def peak_failure(t: H) -> tuple[H, H, H] | None:
        reducts = _ordered(image(t))
        closures = {s: reachable(s, image, bound) for s in reducts}
        for s1, s2 in itertools.combinations(reducts, 2):
            if not closures[s1] & closures[s2]:
                return t, s1, s2
        return None

    hit = first_failure(peak_failure, terms)
    if hit is None:
        return CheckReport(name, anchor, True, checked=len(terms), note=f"join bound {bound}")
    index, witness = hit
    return CheckReport(
        name, anchor, False, witness=witness, checked=index + 1, note=f"join bound {bound}"
    )


Arbiter = Callable[[Term, Term], bool]


def first_outside(lhs: Rel, rhs: Rel, arbiter: Arbiter | None = None) -> Pair | None:
    """Smallest pair of lhs missing from rhs and not accepted by the arbiter."""
    universe: Universe = lhs.universe
    for pair in lhs.sorted_pairs():
        if pair in rhs.pairs:
            continue
        if arbiter is not None and arbiter(universe.term(pair[0]), universe.term(pair[1])):
            continue
        return pair
    return None


def inclusion_report(
    name: str, anchor: str, lhs: Rel, rhs: Rel, arbiter: Arbiter | None = None
) -> CheckReport:
    """CheckReport for lhs ≤ rhs."""
    pair = first_outside(lhs, rhs, arbiter)
    if pair is None:
        return CheckReport(name, anchor, True, checked=len(lhs))
    universe: Universe = lhs.universe
    witness = (universe.term(pair[0]), universe.term(pair[1]))
    logger.info("analyze.inclusion_failed", name=name, witness=[str(t) for t in witness])
    return CheckReport(name, anchor, False, witness=witness, checked=len(lhs))


def equality_report(
    name: str, anchor: str, left: Rel, right: Rel, ids: Iterable[int] | None = None
) -> CheckReport:
    """CheckReport for left = right, optionally restricted to pairs inside ids."""
    if ids is not None:
        keep = list(ids)
        left, right = left.restrict(keep), right.restrict(keep)
    difference = sorted(left.pairs ^ right.pairs)
    if not difference:
        return CheckReport(name, anchor, True, checked=len(left))
    universe: Universe = left.universe
    s, t = difference[0]
    return CheckReport(
        name, anchor, False, witness=(universe.term(s), universe.term(t)), checked=len(left)
    )


def orthogonality_check(es: ESystem, universe: Universe) -> list[CheckReport]:
    """Both operational orthogonality conditions, extensionally over U.

    Condition 1 asks root reducts to be unique; condition 2 asks that reducing
    under a redex instance leaves an instance of the same rule.
    """
    ground = ground_instances(es, universe)
    parallel = parallel_ext(es, universe)
    unique_roots = inclusion_report(
        "orthogonality-unique-root",
        "a[Δ]°;a[Δ] ≤ Δ",
        compose(converse(ground), ground),
        identity(universe),
    )
    stable_redexes = inclusion_report(
        "orthogonality-redex-stable",
        "a[Δ]°;compreff(a^SP) ≤ a°[a^SP]",
        compose(converse(ground), compreff(parallel)),
        rel_subst(converse(rule_rel(es, universe)), parallel),
    )
    return [unique_roots, stable_redexes]


def nesting_check(es: ESystem, universe: Universe, mode: Mode = "parallel") -> CheckReport:
    """Nesting property a°[red] ≤ red;a°[Δ] for red the parallel or full extension."""
    if mode not in ("parallel", "full"):
        raise ValueError(f"nesting is defined for parallel or full reduction, not {mode!r}")
    reduction = parallel_ext(es, universe) if mode == "parallel" else full_ext(es, universe)
    label = "a^SP" if mode == "parallel" else "a^SF"

    def completes(source: Term, target: Term) -> bool:
        return bool(reduce_image(source, es, mode) & ground_image(target, es))

    return inclusion_report(
        f"nesting-{mode}",
        f"a°[{label}] ≤ {label};a°[Δ]",
        rel_subst(converse(rule_rel(es, universe)), reduction),
        compose(reduction, converse(ground_instances(es, universe))),
        completes,
    )


def left_linear(es: ESystem) -> bool:
    """True when no rule left-hand side repeats a variable."""
    return all(is_linear(rule.lhs) for rule in es.rules)


def _rename_apart(rule: Rule, suffix: str) -> Rule:
    def rename(t: Term) -> Term:
        return apply_subst(t, {name: Var(name + suffix) for name in variables(t)})

    return Rule(rename(rule.lhs), rename(rule.rhs))


def critical_pairs(es: ESystem) -> list[CriticalPair]:
    """All overlaps of a rule lhs into a non-variable position of another lhs.

    The overlap of a rule with itself at the root is skipped.
    """
    found: list[CriticalPair] = []
    for j, outer in enumerate(es.rules):
        for position in positions(outer.lhs):
            inside = subterm_at(outer.lhs, position)
            if isinstance(inside, Var):
                continue
            for i, inner in enumerate(es.rules):
                if i == j and not position:
                    continue
                renamed = _rename_apart(inner, "'")
                mgu = unify(renamed.lhs, inside)
                if mgu is None:
                    continue
                peak = apply_subst(outer.lhs, mgu)
                found.append(CriticalPair(
                    peak=peak,
                    left=apply_subst(outer.rhs, mgu),
                    right=replace_at(peak, position, apply_subst(renamed.rhs, mgu)),
                    position=position,
                    rules=(j + 1, i + 1),
                    unifier=mgu,
                ))
    logger.debug("analyze.critical_pairs", count=len(found))
    return found


def _parallel_joins(left: Term, right: Term, es: ESystem) -> bool:
    return bool(parallel_image(left, es) & parallel_image(right, es))


def _parallel_joins_eventually(left: Term, right: Term, es: ESystem) -> bool:
    step = stepper(es, "parallel")
    return bool(reachable(left, step, JOIN_STEPS) & reachable(right, step, JOIN_STEPS))


def kleisli_premise_check(
    es: ESystem, universe: Universe, weak: bool = False
) -> list[CheckReport]:
    """Premise of the Kleisli lemma, and its conclusion when the premise holds.

    Strong form: a°;a^P ≤ a^P;a^P°. Weak form: a°;a^P ≤ a^{P*};a^{P*°}.
    Here a is a[Δ] and a^P the parallel extension.
    """
    ground = ground_instances(es, universe)
    parallel = parallel_ext(es, universe)
    if weak:
        closed = rtc(parallel)
        joins = compose(closed, converse(closed))
        formula = "a^P*;a^P*°"
        arbiter: Arbiter = lambda s, t: _parallel_joins_eventually(s, t, es)  # noqa: E731
    else:
        joins = compose(parallel, converse(parallel))
        formula = "a^P;a^P°"
        arbiter = lambda s, t: _parallel_joins(s, t, es)  # noqa: E731

    kind = "weak" if weak else "strong"
    premise = inclusion_report(
        f"kleisli-premise-{kind}",
        f"a°;a^P ≤ {formula}",
        compose(converse(ground), parallel),
        joins,
        arbiter,
    )
    reports = [premise]
    if premise.passed:
        reports.append(inclusion_report(
            f"kleisli-conclusion-{kind}",
            f"a^P°;a^P ≤ {formula}",
            compose(converse(parallel), parallel),
            joins,
            arbiter,
        ))
    return reports


class ShapeCarrier:
    """One layer of syntax over a universe: variable leaves and operation tuples.

    Elements are (None, (v,)) for a variable id v and (symbol, child ids) for
    every operation applied to universe ids. The tuples are not depth-bounded.
    """

    def __init__(self, universe: Universe):
        self.universe = universe
        elements: list[tuple[str | None, tuple[int, ...]]] = [
            (None, (v,)) for v in universe.var_ids
        ]
        for symbol, arity in sorted(universe.sig.entries):
            elements.extend(
                (symbol, combo) for combo in itertools.product(range(len(universe)), repeat=arity)
            )
        self.elements = elements
        self.index = {e: i for i, e in enumerate(elements)}

    def __len__(self) -> int:
        return len(self.elements)

    def describe(self, i: int) -> str:
        symbol, ids = self.elements[i]
        if symbol is None:
            return str(self.universe.term(ids[0]))
        if not ids:
            return symbol
        return f"{symbol}({','.join(str(self.universe.term(c)) for c in ids)})"


def _variable_pairs(a: Rel, carrier: ShapeCarrier) -> Iterable[Pair]:
    universe = carrier.universe
    for v in universe.var_ids:
        for w in a.row(v):
            if universe.is_var(w):
                yield carrier.index[(None, (v,))], carrier.index[(None, (w,))]


def sigma_lift(a: Rel, carrier: ShapeCarrier) -> Rel:
    """Σ̂a: same symbol, every argument a-related; variables related through a."""
    rows = a.rows
    pairs = list(_variable_pairs(a, carrier))
    for i, (symbol, ids) in enumerate(carrier.elements):
        if symbol is None:
            continue
        options = [rows.get(c, ()) for c in ids]
        pairs.extend(
            (i, carrier.index[(symbol, combo)]) for combo in itertools.product(*options)
        )
    return Rel(carrier, pairs)


def gamma(a: Rel, carrier: ShapeCarrier) -> Rel:
    """Γa: exactly one argument a-related, others equal; constants self-related."""
    rows = a.rows
    pairs = list(_variable_pairs(a, carrier))
    for i, (symbol, ids) in enumerate(carrier.elements):
        if symbol is None:
            continue
        if not ids:
            pairs.append((i, i))
            continue
        for position, child in enumerate(ids):
            for replacement in rows.get(child, ()):
                combo = ids[:position] + (replacement,) + ids[position + 1:]
                pairs.append((i, carrier.index[(symbol, combo)]))
    return Rel(carrier, pairs)


def _shape_report(
    name: str, anchor: str, carrier: ShapeCarrier, failure: tuple[int, Pair] | None,
    trials: int, note: str = "",
) -> CheckReport:
    if failure is None:
        return CheckReport(name, anchor, True, checked=trials, note=note)
    trial, (s, t) = failure
    return CheckReport(
        name, anchor, False,
        witness=(carrier.describe(s), carrier.describe(t)),
        checked=trial + 1, note=note,
    )


def _first_difference(left: Rel, right: Rel) -> Pair | None:
    difference = sorted(left.pairs ^ right.pairs)
    return difference[0] if difference else None


def _first_missing(lhs: Rel, rhs: Rel) -> Pair | None:
    missing = sorted(lhs.pairs - rhs.pairs)
    return missing[0] if missing else None


def sequentialisation_check(
    es: ESystem,
    universe: Universe,
    trials: int = 100,
    seed: int = 0,
    density: float = 0.05,
) -> list[CheckReport]:
    """The five sequentialisation laws for the first-order Γ over random relations.

    Γa ≤ Σa is checked on reflexive a: with a non-reflexive a, the arguments
    Γ leaves untouched are not a-related.
    """
    carrier = ShapeCarrier(universe)
    checks: dict[str, tuple[str, Callable[[Rel, Rel], Pair | None], str]] = {
        "gamma-converse": (
            "Γ(a°) = (Γa)°",
            lambda a, b: _first_difference(gamma(converse(a), carrier),
                                           converse(gamma(a, carrier))),
            "",
        ),
        "gamma-join": (
            "Γ(a ∨ b) = Γa ∨ Γb",
            lambda a, b: _first_difference(gamma(join(a, b), carrier),
                                           join(gamma(a, carrier), gamma(b, carrier))),
            "",
        ),
        "gamma-below-sigma": (
            "Γa ≤ Σa",
            lambda a, b: _first_missing(gamma(a, carrier), sigma_lift(a, carrier)),
            "a reflexive",
        ),
        "sigma-below-gamma-star": (
            "Σa ≤ (Γa)*",
            lambda a, b: _first_missing(sigma_lift(a, carrier), rtc(gamma(a, carrier))),
            "",
        ),
    }
    reports = [_shape_report(
        "gamma-identity", "Δ = ΓΔ", carrier,
        (lambda p: None if p is None else (0, p))(
            _first_difference(gamma(identity(universe), carrier), identity(carrier))
        ),
        1,
    )]
    for law_index, (name, (anchor, check, note)) in enumerate(checks.items()):
        def trial(k: int, law_index: int = law_index, check=check, note=note) -> Pair | None:
            rng = np.random.default_rng([seed, law_index, k])
            closure = "reflexive" if note else None
            a = random_rel(universe, rng, density=density, closure=closure)
            b = random_rel(universe, rng, density=density)
            return check(a, b)

        hit = first_failure(trial, list(range(trials)))
        reports.append(_shape_report(name, anchor, carrier, hit, trials, note))
    return reports


def parallel_moves_check(es: ESystem, universe: Universe) -> list[CheckReport]:
    """Hypotheses of the parallel moves theorem and its diamond conclusion."""
    reports = orthogonality_check(es, universe)
    reports.append(nesting_check(es, universe, "parallel"))
    reports.append(diamond_check(
        lambda t: parallel_image(t, es), list(universe.terms),
        name="diamond-parallel", anchor="a^SP°;a^SP ≤ a^SP;a^SP°",
    ))
    return reports


def tml_check(es: ESystem, universe: Universe) -> list[CheckReport]:
    """Hypotheses of the Tait–Martin-Löf theorem and the full-reduction diamond."""
    reports = orthogonality_check(es, universe)
    reports.append(nesting_check(es, universe, "full"))
    reports.append(diamond_check(
        lambda t: full_image(t, es), list(universe.terms),
        name="diamond-full", anchor="a^SF°;a^SF ≤ a^SF;a^SF°",
    ))
    return reports


def oracle_check(
    es: ESystem,
    universe: Universe,
    source_depth: int | None = None,
    modes: Sequence[Mode] = MODES,
) -> list[CheckReport]:
    """Image enumerators restricted to U agree with the extensional rows.

    Full reduction may pass through a rebuilt term deeper than D before a root
    contraction brings it back inside U, so for that mode only row ⊆ image is
    required.

    Args:
        source_depth: Depth bound for the sources (default D − 1).
    """
    sources = universe.ids_up_to(universe.depth - 1 if source_depth is None else source_depth)
    reports = []
    for mode in modes:
        relation = extensional(es, universe, mode)
        report = CheckReport(f"oracle-{mode}", f"{mode}_image(t) ∩ U = row(t)", True,
                             checked=len(sources))
        for s in sources:
            t = universe.term(s)
            expected = {universe.index[r] for r in reduce_image(t, es, mode) if r in universe}
            row = relation.row(s)
            difference = sorted(row - expected if mode == "full" else expected ^ row)
            if difference:
                report.passed = False
                report.witness = (t, universe.term(difference[0]))
                break
        reports.append(report)
    return reports


def structural_checks(es: ESystem, universe: Universe) -> list[CheckReport]:
    """Extensional equalities between independently computed relations.

    Compared on pairs whose terms both have depth ≤ D − 1.
    """
    inner = universe.ids_up_to(universe.depth - 1)
    everything = Rel(universe, ((v, w) for v in universe.var_ids for w in universe.var_ids))
    return [
        equality_report(
            "parallel-is-context-closure", "a^SP = a[Δ]^C",
            parallel_ext(es, universe), ctx_closure(ground_instances(es, universe)), inner,
        ),
        equality_report(
            "full-is-howe", "a^SF = a^SH",
            full_ext(es, universe), howe_ext(es, universe), inner,
        ),
        equality_report(
            "barr-lift-inductive", "Ŝa = μx.(η°;a;η) ∨ compreff(x)",
            barr_lift(everything), barr_lift_lfp(everything), inner,
        ),
    ]


def inclusion_chain_check(es: ESystem, universe: Universe) -> list[CheckReport]:
    """a^SP ≤ a^SF ≤ (a^SP)* = (a^SF)*."""
    parallel = parallel_ext(es, universe)
    full = full_ext(es, universe)
    parallel_star = rtc(parallel)
    full_star = rtc(full)
    step = stepper(es, "parallel")

    def reaches(source: Term, target: Term) -> bool:
        return target in reachable(source, step, JOIN_STEPS)

    return [
        inclusion_report("parallel-below-full", "a^SP ≤ a^SF", parallel, full),
        inclusion_report("full-below-parallel-star", "a^SF ≤ (a^SP)*", full, parallel_star,
                         reaches),
        inclusion_report("parallel-star-below-full-star", "(a^SP)* ≤ (a^SF)*",
                         parallel_star, full_star),
        inclusion_report("full-star-below-parallel-star", "(a^SF)* ≤ (a^SP)*",
                         full_star, parallel_star, reaches),
    ]


def lambda_checks(mode: str, scope: int, size: int) -> list[CheckReport]:
    """Confluence checks for β on every term of the given scope and size bound.

    Parallel mode checks the diamond and weak confluence; full mode checks the
    diamond and closure under renaming and weakening.
    """
    terms = lam.enumerate_lams(scope, size)
    if mode == "parallel":
        image = lam.lam_parallel_image
        return [
            diamond_check(image, terms, name="lambda-diamond-parallel",
                          anchor="a^SP°;a^SP ≤ a^SP;a^SP°"),
            weak_confluence_check(image, terms, name="lambda-weak-confluence-parallel",
                                  anchor="a^P°;a^P ≤ a^P*;a^P*°"),
        ]
    if mode == "full":
        image = lam.lam_full_image
        renaming = lam.renaming_closure_check(image, scope, size)
        return [
            diamond_check(image, terms, name="lambda-diamond-full",
                          anchor="a^SF°;a^SF ≤ a^SF;a^SF°"),
            CheckReport(
                "lambda-renaming-closure", "(tρ) ⇒ (sρ) whenever t ⇒ s",
                renaming.passed, witness=renaming.witness[:1] if renaming.witness else None,
                checked=renaming.checked,
            ),
        ]
    raise ValueError(f"unknown lambda mode {mode!r}")
