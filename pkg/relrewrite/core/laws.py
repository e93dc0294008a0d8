"""Randomized law suite over a bounded universe.

Every law draws its input relations from terms of depth ≤ D − margin so
that the bounded universe agrees with the unbounded carrier on everything
the law asserts. Laws that can still reach past the boundary consult the
reduct enumerators for the pairs the bounded side misses.

Trials are seeded per (seed, law index, trial index), so a report is a pure
function of the system, the configuration and the law table.
"""

from __future__ import annotations

from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

import numpy as np
import structlog
from pydantic import BaseModel, Field

from relrewrite.core.analyze import (
    CheckReport,
    first_failure,
    first_outside,
    inclusion_chain_check,
    structural_checks,
)
from relrewrite.core.ops import (
    compref,
    compreff,
    full_ext,
    ground_instances,
    howe_ext,
    i_eta,
    parallel_ext,
    rel_subst,
    rule_rel,
    scc_ext,
)
from relrewrite.core.reduce import full_image, scc_image
from relrewrite.core.rel import (
    Rel,
    bottom,
    compose,
    converse,
    identity,
    join,
    join_all,
    kleene_lfp,
    meet,
    refl_close,
    rtc,
)
from relrewrite.core.sampling import Closure, ground_ids, random_rel
from relrewrite.core.term import ESystem, Term
from relrewrite.core.universe import Universe, universe_for

logger = structlog.get_logger(__name__)

Witness = tuple[Any, ...]


class LawSuiteConfig(BaseModel):
    """Parameters of one law-suite run."""

    depth: int = Field(default=3, ge=2, description="Universe depth bound D")
    trials: int = Field(default=100, ge=1, description="Random trials per law")
    seed: int = Field(default=0, ge=0)
    density: float = Field(default=0.05, gt=0.0, le=1.0, description="Pair density of inputs")


@dataclass(frozen=True)
class InputSpec:
    """How one random input relation of a law is drawn.

    Attributes:
        name: Name the check receives the relation under.
        margin: Support depth is D − margin.
        support_depth: Absolute support depth, overriding margin.
        closure: Post-processing that establishes a precondition.
        ground: Restrict the support to variable-free terms.
        max_pairs: Upper bound on drawn pairs.
    """
    name: str
    margin: int = 0
    support_depth: int | None = None
    closure: Closure = None
    ground: bool = False
    max_pairs: int = 200


@dataclass(frozen=True)
class Law:
    """One law of the suite.

    A law without inputs is deterministic and runs once.
    """
    name: str
    anchor: str
    check: Callable[[LawContext, Mapping[str, Rel]], Witness | None]
    inputs: tuple[InputSpec, ...] = ()
    gating: bool = True
    note: str = ""

    @property
    def margin(self) -> int:
        return max((spec.margin for spec in self.inputs), default=0)


@dataclass
class Counterexample:
    """A failing trial.

    Attributes:
        trial: Index of the trial that failed.
        inputs: The input relations, each as sorted "s -> t" strings.
        witness: Terms exhibiting the failure.
    """
    trial: int
    inputs: dict[str, list[str]]
    witness: Witness


@dataclass
class LawOutcome:
    name: str
    anchor: str
    margin: int
    trials: int
    passed: bool
    gating: bool = True
    counterexample: Counterexample | None = None
    note: str = ""


@dataclass
class LawReport:
    """Result of a law-suite run.

    Attributes:
        outcomes: One entry per law, in table order.
        config: The configuration the suite ran with.
    """
    outcomes: list[LawOutcome] = field(default_factory=list)
    config: LawSuiteConfig = field(default_factory=LawSuiteConfig)

    @property
    def passed(self) -> bool:
        """True when every gating law passed; informational laws never fail a run."""
        return all(o.passed for o in self.outcomes if o.gating)

    def failures(self) -> list[LawOutcome]:
        return [o for o in self.outcomes if not o.passed]


class LawContext:
    """The system, its universe and lazily built extensional relations."""

    def __init__(self, es: ESystem, universe: Universe, config: LawSuiteConfig):
        self.es = es
        self.universe = universe
        self.config = config

    @cached_property
    def rules(self) -> Rel:
        return rule_rel(self.es, self.universe)

    @cached_property
    def ground(self) -> Rel:
        return ground_instances(self.es, self.universe)

    @cached_property
    def parallel(self) -> Rel:
        return parallel_ext(self.es, self.universe)

    @cached_property
    def full(self) -> Rel:
        return full_ext(self.es, self.universe)

    @cached_property
    def howe(self) -> Rel:
        return howe_ext(self.es, self.universe)

    @cached_property
    def scc(self) -> Rel:
        return scc_ext(self.es, self.universe)

    @property
    def has_variables(self) -> bool:
        return bool(self.universe.varset.names)

    def draw(self, spec: InputSpec, rng: np.random.Generator) -> Rel:
        depth = self.universe.depth
        support = spec.support_depth if spec.support_depth is not None else depth - spec.margin
        support = max(support, 1)
        ids = ground_ids(self.universe, support) if spec.ground else None
        return random_rel(
            self.universe,
            rng,
            support_depth=support,
            density=self.config.density,
            max_pairs=spec.max_pairs,
            closure=spec.closure,
            ids=ids,
        )


def _terms(universe: Universe, pair: tuple[int, int]) -> Witness:
    return universe.term(pair[0]), universe.term(pair[1])


def missing(
    lhs: Rel, rhs: Rel, arbiter: Callable[[Term, Term], bool] | None = None
) -> Witness | None:
    """Witness for lhs ≤ rhs failing, or None."""
    pair = first_outside(lhs, rhs, arbiter)
    return None if pair is None else _terms(lhs.universe, pair)


def differs(left: Rel, right: Rel) -> Witness | None:
    """Witness for left = right failing, or None."""
    difference = sorted(left.pairs ^ right.pairs)
    return None if not difference else _terms(left.universe, difference[0])


def _first_failed(reports: Sequence[CheckReport]) -> Witness | None:
    for report in reports:
        if not report.passed:
            return (report.name, *(report.witness or ()))
    return None


def _full_arbiter(ctx: LawContext) -> Callable[[Term, Term], bool]:
    return lambda s, t: t in full_image(s, ctx.es)


def _inputs(*specs: InputSpec) -> tuple[InputSpec, ...]:
    return specs


# Allegory and fixed points

def _modular(ctx: LawContext, r: Mapping[str, Rel]) -> Witness | None:
    a, b, c = r["a"], r["b"], r["c"]
    return missing(meet(compose(a, b), c), compose(meet(a, compose(c, converse(b))), b))


def _distributes(ctx: LawContext, r: Mapping[str, Rel]) -> Witness | None:
    a, b, c = r["a"], r["b"], r["c"]
    return differs(compose(a, join(b, c)), join(compose(a, b), compose(a, c)))


def _involution(ctx: LawContext, r: Mapping[str, Rel]) -> Witness | None:
    return differs(converse(converse(r["a"])), r["a"])


def _antidistributes(ctx: LawContext, r: Mapping[str, Rel]) -> Witness | None:
    a, b = r["a"], r["b"]
    return differs(converse(compose(a, b)), compose(converse(b), converse(a)))


def _converse_monotone(ctx: LawContext, r: Mapping[str, Rel]) -> Witness | None:
    a, b = r["a"], r["b"]
    return missing(converse(a), converse(join(a, b)))


def _rtc_unfolds(ctx: LawContext, r: Mapping[str, Rel]) -> Witness | None:
    a = r["a"]
    star = rtc(a)
    return differs(star, join(identity(a.universe), compose(a, star)))


def _lfp_below_prefixed(ctx: LawContext, r: Mapping[str, Rel]) -> Witness | None:
    a, b, c = r["a"], r["b"], r["c"]
    least = kleene_lfp(lambda x: join(a, compose(b, x)), a.universe, spot_checks=0)
    prefixed = compose(rtc(b), join(a, c))
    return missing(least, prefixed)


# Relators

def _compref_identity(ctx: LawContext, r: Mapping[str, Rel]) -> Witness | None:
    delta = identity(ctx.universe)
    return differs(compref(delta), delta)


def _compreff_identity(ctx: LawContext, r: Mapping[str, Rel]) -> Witness | None:
    delta = identity(ctx.universe)
    nodes = Rel(ctx.universe, delta.pairs - i_eta(ctx.universe).pairs)
    return differs(compreff(delta), nodes)


def _relator_composition(lift: Callable[[Rel], Rel]):
    def check(ctx: LawContext, r: Mapping[str, Rel]) -> Witness | None:
        a, b = r["a"], r["b"]
        return differs(lift(compose(a, b)), compose(lift(a), lift(b)))
    return check


def _relator_converse(lift: Callable[[Rel], Rel]):
    def check(ctx: LawContext, r: Mapping[str, Rel]) -> Witness | None:
        a = r["a"]
        return differs(lift(converse(a)), converse(lift(a)))
    return check


def _relator_monotone(lift: Callable[[Rel], Rel]):
    def check(ctx: LawContext, r: Mapping[str, Rel]) -> Witness | None:
        a, b = r["a"], r["b"]
        return missing(lift(a), lift(join(a, b)))
    return check


def _compref_chain_join(ctx: LawContext, r: Mapping[str, Rel]) -> Witness | None:
    chain = [r["a"]]
    for name in ("b", "c"):
        chain.append(join(chain[-1], r[name]))
    lifted = join_all(ctx.universe, (compref(x) for x in chain))
    return differs(compref(join_all(ctx.universe, chain)), lifted)


def _compreff_no_variables(ctx: LawContext, r: Mapping[str, Rel]) -> Witness | None:
    return missing(meet(compreff(r["a"]), i_eta(ctx.universe)), bottom(ctx.universe))


def _compref_star(ctx: LawContext, r: Mapping[str, Rel]) -> Witness | None:
    a = r["a"]
    return differs(compref(rtc(a)), rtc(compref(a)))


# Relation substitution

def _subst_monotone(ctx: LawContext, r: Mapping[str, Rel]) -> Witness | None:
    a, b, a2, b2 = r["a"], r["b"], r["a2"], r["b2"]
    return missing(rel_subst(a, b), rel_subst(join(a, a2), join(b, b2)))


def _subst_converse(ctx: LawContext, r: Mapping[str, Rel]) -> Witness | None:
    a, b = r["a"], r["b"]
    return differs(converse(rel_subst(a, b)), rel_subst(converse(a), converse(b)))


def _subst_bottom(ctx: LawContext, r: Mapping[str, Rel]) -> Witness | None:
    if not ctx.has_variables:
        return None
    return missing(rel_subst(r["a"], bottom(ctx.universe)), bottom(ctx.universe))


def _subst_compreff(ctx: LawContext, r: Mapping[str, Rel]) -> Witness | None:
    a, b = r["a"], r["b"]
    return missing(rel_subst(compreff(a), b), compreff(rel_subst(a, b)))


def _subst_variables(ctx: LawContext, r: Mapping[str, Rel]) -> Witness | None:
    b = r["b"]
    return missing(rel_subst(i_eta(ctx.universe), b), b)


def _subst_compref(ctx: LawContext, r: Mapping[str, Rel]) -> Witness | None:
    a, b = r["a"], r["b"]
    return missing(rel_subst(compref(a), b), join(compref(rel_subst(a, b)), b))


def _subst_compref_unguarded(ctx: LawContext, r: Mapping[str, Rel]) -> Witness | None:
    a, b = r["a"], r["b"]
    return missing(rel_subst(compref(a), b), compref(rel_subst(a, b)))


def _subst_associative_inclusion(ctx: LawContext, r: Mapping[str, Rel]) -> Witness | None:
    a, b, c = r["a"], r["b"], r["c"]
    return missing(rel_subst(rel_subst(a, b), c), rel_subst(a, rel_subst(b, c)))


def _subst_associative(ctx: LawContext, r: Mapping[str, Rel]) -> Witness | None:
    a, b, c = r["a"], r["b"], r["c"]
    return differs(rel_subst(rel_subst(a, b), c), rel_subst(a, rel_subst(b, c)))


def _subst_lax_composition(ctx: LawContext, r: Mapping[str, Rel]) -> Witness | None:
    a, a2, b, b2 = r["a"], r["a2"], r["b"], r["b2"]
    return missing(
        rel_subst(compose(a, a2), compose(b, b2)),
        compose(rel_subst(a, b), rel_subst(a2, b2)),
    )


def _subst_reflexive_exchange(ctx: LawContext, r: Mapping[str, Rel]) -> Witness | None:
    a = r["a"]
    delta = identity(ctx.universe)
    return differs(refl_close(rel_subst(a, delta)), rel_subst(refl_close(a), delta))


def _ground_reflexive_exchange(ctx: LawContext, r: Mapping[str, Rel]) -> Witness | None:
    delta = identity(ctx.universe)
    return differs(refl_close(ctx.ground), rel_subst(refl_close(ctx.rules), delta))


# Closures of the system's reductions

def _parallel_substitutive(ctx: LawContext, r: Mapping[str, Rel]) -> Witness | None:
    return missing(rel_subst(ctx.parallel, identity(ctx.universe)), ctx.parallel)


def _parallel_under_substitution(ctx: LawContext, r: Mapping[str, Rel]) -> Witness | None:
    return missing(rel_subst(identity(ctx.universe), ctx.parallel), ctx.parallel)


def _parallel_reflexive(ctx: LawContext, r: Mapping[str, Rel]) -> Witness | None:
    return missing(identity(ctx.universe), ctx.parallel)


def _full_compatible(ctx: LawContext, r: Mapping[str, Rel]) -> Witness | None:
    return missing(compref(ctx.full), ctx.full)


def _full_substitutive(ctx: LawContext, r: Mapping[str, Rel]) -> Witness | None:
    return missing(
        rel_subst(ctx.full, identity(ctx.universe)), ctx.full, _full_arbiter(ctx)
    )


def _structural(ctx: LawContext, r: Mapping[str, Rel]) -> Witness | None:
    return _first_failed(structural_checks(ctx.es, ctx.universe))


def _inclusion_chain(ctx: LawContext, r: Mapping[str, Rel]) -> Witness | None:
    return _first_failed(inclusion_chain_check(ctx.es, ctx.universe))


def _scc_below_howe(ctx: LawContext, r: Mapping[str, Rel]) -> Witness | None:
    return missing(ctx.scc, ctx.howe, _full_arbiter(ctx))


def _scc_triangle_formula(ctx: LawContext, r: Mapping[str, Rel]) -> Witness | None:
    return missing(ctx.scc, compose(ctx.scc, converse(ctx.scc)))


def _scc_triangle(ctx: LawContext, r: Mapping[str, Rel]) -> Witness | None:
    """Each term has a reduct that every one of its reducts reaches in one step."""
    for source in ctx.universe.ids_up_to(ctx.universe.depth - 1):
        t = ctx.universe.term(source)
        reducts = scc_image(t, ctx.es)
        if not any(all(u in scc_image(s, ctx.es) for s in reducts) for u in reducts):
            return (t,)
    return None


_A = InputSpec("a", margin=1)
_B = InputSpec("b", margin=1)
_C = InputSpec("c", margin=1)
_SMALL_A = InputSpec("a", margin=1, max_pairs=12)
_SMALL_B = InputSpec("b", margin=1, max_pairs=12)

LAWS: tuple[Law, ...] = (
    Law("modular", "a;b ∧ c ≤ (a ∧ c;b°);b", _modular,
        _inputs(InputSpec("a"), InputSpec("b"), InputSpec("c"))),
    Law("compose-distributes-join", "a;(b ∨ c) = a;b ∨ a;c", _distributes,
        _inputs(InputSpec("a"), InputSpec("b"), InputSpec("c"))),
    Law("converse-involution", "a°° = a", _involution, _inputs(InputSpec("a"))),
    Law("converse-antidistributes", "(a;b)° = b°;a°", _antidistributes,
        _inputs(InputSpec("a"), InputSpec("b"))),
    Law("converse-monotone", "a ≤ a ∨ b ⇒ a° ≤ (a ∨ b)°", _converse_monotone,
        _inputs(InputSpec("a"), InputSpec("b"))),
    Law("rtc-unfolds", "a* = Δ ∨ a;a*", _rtc_unfolds, _inputs(InputSpec("a"))),
    Law("lfp-below-prefixed-point", "μx.a ∨ b;x ≤ b*;(a ∨ c)", _lfp_below_prefixed,
        _inputs(InputSpec("a"), InputSpec("b"), InputSpec("c"))),
    Law("compref-identity", "compref(Δ) = Δ", _compref_identity),
    Law("compreff-identity", "compreff(Δ) = Δ ∧ ¬I_η", _compreff_identity),
    Law("compreff-composition", "compreff(a;b) = compreff(a);compreff(b)",
        _relator_composition(compreff), _inputs(_A, _B)),
    Law("compref-composition", "compref(a;b) = compref(a);compref(b)",
        _relator_composition(compref), _inputs(_A, _B)),
    Law("compreff-converse", "compreff(a°) = compreff(a)°", _relator_converse(compreff),
        _inputs(_A)),
    Law("compref-converse", "compref(a°) = compref(a)°", _relator_converse(compref),
        _inputs(_A)),
    Law("compreff-monotone", "a ≤ a ∨ b ⇒ compreff(a) ≤ compreff(a ∨ b)",
        _relator_monotone(compreff), _inputs(_A, _B)),
    Law("compref-monotone", "a ≤ a ∨ b ⇒ compref(a) ≤ compref(a ∨ b)",
        _relator_monotone(compref), _inputs(_A, _B)),
    Law("compref-chain-join", "compref(⋁aᵢ) = ⋁compref(aᵢ) for a chain aᵢ",
        _compref_chain_join, _inputs(_A, _B, _C)),
    Law("compreff-no-variables", "compreff(a) ∧ I_η = ⊥", _compreff_no_variables,
        _inputs(InputSpec("a"))),
    Law("compref-star", "compref(a*) = compref(a)*", _compref_star,
        _inputs(InputSpec("a", margin=1, closure="reflexive")), note="a reflexive"),
    Law("subst-monotone", "a ≤ a′, b ≤ b′ ⇒ a[b] ≤ a′[b′]", _subst_monotone,
        _inputs(_SMALL_A, _SMALL_B, InputSpec("a2", margin=1, max_pairs=12),
                InputSpec("b2", margin=1, max_pairs=12))),
    Law("subst-converse", "a[b]° = a°[b°]", _subst_converse, _inputs(_SMALL_A, _SMALL_B)),
    Law("subst-bottom", "a[⊥] = ⊥", _subst_bottom, _inputs(_SMALL_A),
        note="vacuous without declared variables"),
    Law("subst-compreff", "compreff(a)[b] ≤ compreff(a[b])", _subst_compreff,
        _inputs(_SMALL_A, _SMALL_B)),
    Law("subst-variables", "I_η[b] ≤ b", _subst_variables, _inputs(_SMALL_B)),
    Law("subst-compref", "compref(a)[b] ≤ compref(a[b]) ∨ b", _subst_compref,
        _inputs(_SMALL_A, _SMALL_B)),
    Law("subst-associative-inclusion", "a[b][c] ≤ a[b[c]]", _subst_associative_inclusion,
        _inputs(InputSpec("a", margin=1, max_pairs=6), InputSpec("b", margin=1, max_pairs=6),
                InputSpec("c", margin=1, max_pairs=6))),
    Law("subst-associative", "a[b][c] = a[b[c]]", _subst_associative,
        _inputs(InputSpec("a", margin=1, max_pairs=6),
                InputSpec("b", margin=1, ground=True, max_pairs=6),
                InputSpec("c", margin=1, max_pairs=6)),
        note="b supported on ground terms"),
    Law("subst-lax-composition", "(a;a′)[b;b′] ≤ a[b];a′[b′]", _subst_lax_composition,
        _inputs(_SMALL_A, InputSpec("a2", margin=1, max_pairs=12),
                InputSpec("b", support_depth=1, max_pairs=12),
                InputSpec("b2", support_depth=1, max_pairs=12))),
    Law("subst-reflexive-exchange", "a[Δ]^= = a^=[Δ]", _subst_reflexive_exchange,
        _inputs(_SMALL_A)),
    Law("ground-reflexive-exchange", "a[Δ]^= = a^=[Δ] for the rules", _ground_reflexive_exchange),
    Law("parallel-reflexive", "Δ ≤ a^SP", _parallel_reflexive),
    Law("parallel-substitutive", "a^SP[Δ] ≤ a^SP", _parallel_substitutive),
    Law("parallel-under-substitution", "Δ[a^SP] ≤ a^SP", _parallel_under_substitution),
    Law("full-compatible", "compref(a^SF) ≤ a^SF", _full_compatible),
    Law("full-substitutive", "a^SF[Δ] ≤ a^SF", _full_substitutive),
    Law("structural-equalities", "a^SP = a[Δ]^C, a^SF = a^SH, Ŝa = μx.(η°;a;η) ∨ compreff(x)",
        _structural),
    Law("inclusion-chain", "a^SP ≤ a^SF ≤ (a^SP)* = (a^SF)*", _inclusion_chain),
    Law("scc-below-howe", "a^SCC ≤ a^SH", _scc_below_howe),
    Law("scc-triangle-formula", "x ≤ x;x° for x = a^SCC", _scc_triangle_formula,
        gating=False, note="recorded, not asserted"),
    Law("scc-triangle", "∀t ∃t*: t x s ⇒ s x t* for x = a^SCC", _scc_triangle,
        gating=False, note="recorded, not asserted"),
)

MUTANT_LAWS: tuple[Law, ...] = (
    Law("mutant-subst-compref", "compref(a)[b] ≤ compref(a[b])", _subst_compref_unguarded,
        _inputs(_SMALL_A, _SMALL_B), note="negative control, expected to fail"),
)


def _describe(rels: Mapping[str, Rel]) -> dict[str, list[str]]:
    described = {}
    for name, rel in rels.items():
        universe: Universe = rel.universe
        described[name] = [
            f"{universe.term(s)} -> {universe.term(t)}" for s, t in rel.sorted_pairs()
        ]
    return described


def run_law(ctx: LawContext, law: Law, law_index: int) -> LawOutcome:
    """Run every trial of one law and keep the first failing one."""
    seed = ctx.config.seed
    trials = ctx.config.trials if law.inputs else 1

    def trial(k: int) -> Counterexample | None:
        rng = np.random.default_rng([seed, law_index, k])
        rels = {spec.name: ctx.draw(spec, rng) for spec in law.inputs}
        witness = law.check(ctx, rels)
        if witness is None:
            return None
        return Counterexample(k, _describe(rels), witness)

    if law.inputs:
        hit = first_failure(trial, list(range(trials)))
        counterexample = None if hit is None else hit[1]
    else:
        counterexample = trial(0)

    outcome = LawOutcome(
        name=law.name,
        anchor=law.anchor,
        margin=law.margin,
        trials=trials if counterexample is None else counterexample.trial + 1,
        passed=counterexample is None,
        gating=law.gating,
        counterexample=counterexample,
        note=law.note,
    )
    if counterexample is not None:
        logger.info("laws.law_failed", law=law.name, trial=counterexample.trial,
                    gating=law.gating)
    return outcome


def law_suite(
    es: ESystem,
    config: LawSuiteConfig | None = None,
    laws: Sequence[Law] = LAWS,
    universe: Universe | None = None,
) -> LawReport:
    """Run a law table against an E-system.

    Args:
        es: The system whose rules and reductions the closure laws use.
        config: Depth, trials, seed and input density.
        laws: The law table; MUTANT_LAWS can be appended as a negative control.
        universe: A prebuilt universe of depth config.depth.

    Returns:
        LawReport with one outcome per law.

    Raises:
        RuleEmbeddingError: If a rule does not fit in the universe.
    """
    config = config or LawSuiteConfig()
    if universe is None:
        universe = universe_for(es, config.depth)
    ctx = LawContext(es, universe, config)
    # Fail on embedding before any trial runs.
    _ = ctx.rules
    logger.info("laws.suite_started", laws=len(laws), depth=config.depth,
                trials=config.trials, seed=config.seed, universe=len(universe))
    report = LawReport(config=config)
    for index, law in enumerate(laws):
        report.outcomes.append(run_law(ctx, law, index))
    logger.info("laws.suite_finished", passed=report.passed,
                failures=[o.name for o in report.failures()])
    return report
