"""Operators of the augmented calculus of relations over a term universe.

Compatible refinement, relation substitution and its right adjoint, context
closures, the Barr lifting of the syntax functor, and the extensional
reduction relations built from an E-system's rules.

Every operator computes inside the bounded universe: a pair is present only
when both of its terms, and every intermediate term its definition asks
for, have depth ≤ D.
"""

from __future__ import annotations

import itertools
from collections.abc import Callable, Iterable, Iterator

import structlog

from relrewrite.core.rel import (
    Pair,
    Rel,
    compose,
    identity,
    join,
    kleene_lfp,
    refl_close,
    require_same_universe,
)
from relrewrite.core.term import ESystem, Term, variable_depths
from relrewrite.core.universe import Universe

logger = structlog.get_logger(__name__)


class RuleEmbeddingError(Exception):
    """Raised when a rule does not fit inside the universe depth."""


def rule_rel(es: ESystem, universe: Universe) -> Rel:
    """The rules of an E-system as a relation on U (the relation a itself)."""
    pairs = []
    for index, rule in enumerate(es.rules, start=1):
        lhs = universe.index.get(rule.lhs)
        rhs = universe.index.get(rule.rhs)
        if lhs is None or rhs is None:
            raise RuleEmbeddingError(
                f"rule {index} ({rule}) does not fit in the depth-{universe.depth} universe"
            )
        pairs.append((lhs, rhs))
    return Rel(universe, pairs)


def i_eta(universe: Universe) -> Rel:
    """I_η: the identity on variable leaves."""
    return Rel(universe, ((i, i) for i in universe.var_ids))


def _node_targets(
    universe: Universe, symbol: str, options: list[Iterable[int]]
) -> Iterator[int]:
    for combo in itertools.product(*options):
        target = universe.node_id(symbol, combo)
        if target is not None:
            yield target


def compreff(a: Rel) -> Rel:
    """Relates o(t₁…tₙ) to o(s₁…sₙ) whenever tᵢ a sᵢ for every i.

    Constants relate to themselves; variables relate to nothing.
    """
    universe: Universe = a.universe
    rows = a.rows
    pairs: list[Pair] = []
    for u in range(len(universe)):
        symbol = universe.symbol_of(u)
        if symbol is None:
            continue
        options = [rows.get(c) for c in universe.children_of(u)]
        if not all(options):
            continue
        pairs.extend((u, v) for v in _node_targets(universe, symbol, options))
    return Rel(universe, pairs)


def compref(a: Rel) -> Rel:
    """Compatible refinement: I_η ∨ compreff(a)."""
    return join(i_eta(a.universe), compreff(a))


def linear_refine(a: Rel) -> Rel:
    """One-hole refinement: exactly one argument a-related, the others equal."""
    universe: Universe = a.universe
    rows = a.rows
    pairs: list[Pair] = []
    for u in range(len(universe)):
        symbol = universe.symbol_of(u)
        if symbol is None:
            continue
        children = universe.children_of(u)
        for i, child in enumerate(children):
            for replacement in rows.get(child, ()):
                combo = children[:i] + (replacement,) + children[i + 1:]
                target = universe.node_id(symbol, combo)
                if target is not None:
                    pairs.append((u, target))
    return Rel(universe, pairs)


def _iter_subst(universe: Universe, a_pairs: Iterable[Pair], b: Rel) -> Iterator[Pair]:
    """Pairs (pγ, qγ′) for (p, q) in a_pairs and total γ b γ′, within U."""
    if not b.pairs:
        return
    limit = universe.depth
    domain = sorted(b.domain())
    targets = sorted(b.range())
    b_pairs = b.sorted_pairs()
    depth_of = universe.depth_of

    for p_id, q_id in a_pairs:
        p, q = universe.term(p_id), universe.term(q_id)
        p_bound = {v: limit - d + 1 for v, d in variable_depths(p).items()}
        q_bound = {v: limit - d + 1 for v, d in variable_depths(q).items()}
        shared = [v for v in p_bound if v in q_bound]

        shared_options = [
            [
                (s, t) for s, t in b_pairs
                if depth_of(s) <= p_bound[v] and depth_of(t) <= q_bound[v]
            ]
            for v in shared
        ]
        p_only = {
            v: [s for s in domain if depth_of(s) <= bound]
            for v, bound in p_bound.items() if v not in q_bound
        }
        q_only = {
            v: [t for t in targets if depth_of(t) <= bound]
            for v, bound in q_bound.items() if v not in p_bound
        }
        if not all(shared_options) or not all(p_only.values()) or not all(q_only.values()):
            continue

        for combo in itertools.product(*shared_options):
            p_env = {v: s for v, (s, _) in zip(shared, combo)}
            q_env = {v: t for v, (_, t) in zip(shared, combo)}
            p_side = _instances(universe, p, p_env, p_only)
            if not p_side:
                continue
            q_side = _instances(universe, q, q_env, q_only)
            for source in p_side:
                for target in q_side:
                    yield source, target


def _instances(
    universe: Universe, t: Term, fixed: dict[str, int], free: dict[str, list[int]]
) -> set[int]:
    names = list(free)
    found: set[int] = set()
    for values in itertools.product(*(free[n] for n in names)):
        env = dict(fixed)
        env.update(zip(names, values))
        instance = universe.instantiate(t, env)
        if instance is not None:
            found.add(instance)
    return found


def rel_subst(a: Rel, b: Rel) -> Rel:
    """Relation substitution a[b].

    Relates pγ to qγ′ for every (p, q) in a and all total substitutions
    γ, γ′ over the declared variables with γ(v) b γ′(v) pointwise, whenever
    both instances lie in U. With no declared variables, a[b] = a.
    """
    require_same_universe(a, b)
    universe: Universe = a.universe
    if not universe.varset.names:
        return a
    return Rel(universe, _iter_subst(universe, a.pairs, b))


def subst_adjoint(b: Rel, c: Rel) -> Rel:
    """Right adjoint b ≫ c: the largest x with x[b] ≤ c, computed pairwise."""
    require_same_universe(b, c)
    universe: Universe = b.universe
    if not universe.varset.names:
        return Rel(universe, c.pairs)
    n = len(universe)
    allowed = c.pairs
    pairs = [
        (t, s)
        for t in range(n)
        for s in range(n)
        if all(pair in allowed for pair in _iter_subst(universe, ((t, s),), b))
    ]
    return Rel(universe, pairs)


def ctx_closure(a: Rel) -> Rel:
    """a^C = μx. a ∨ compref(x)."""
    return kleene_lfp(lambda x: join(a, compref(x)), a.universe)


def ground_instances(es: ESystem, universe: Universe) -> Rel:
    """a[Δ]: every substitution instance of a rule inside U."""
    return rel_subst(rule_rel(es, universe), identity(universe))


def subst_ctx_closure(es: ESystem, universe: Universe) -> Rel:
    """a^SC = a[Δ]^C."""
    return ctx_closure(ground_instances(es, universe))


def _fold(
    universe: Universe,
    leaf: Callable[[int], Iterable[int]],
    after: Callable[[int], Iterable[int]] | None = None,
) -> Rel:
    """Bottom-up structural recursion over the layered ids.

    A variable v maps to leaf(v). A node o(c₁…cₙ) maps to every o(s₁…sₙ) in U
    with sᵢ in the image of cᵢ, each followed by `after` when given.
    """
    images: list[frozenset[int]] = []
    for u in range(len(universe)):
        symbol = universe.symbol_of(u)
        if symbol is None:
            images.append(frozenset(leaf(u)))
            continue
        options = [images[c] for c in universe.children_of(u)]
        reached: set[int] = set()
        for w in _node_targets(universe, symbol, options):
            reached.add(w)
            if after is not None:
                reached.update(after(w))
        images.append(frozenset(reached))
    return Rel(universe, ((u, s) for u, row in enumerate(images) for s in row))


def _variable_part(a_vars: Rel) -> Rel:
    universe: Universe = a_vars.universe
    stray = [
        (s, t) for s, t in a_vars.sorted_pairs()
        if not (universe.is_var(s) and universe.is_var(t))
    ]
    if stray:
        s, t = stray[0]
        raise ValueError(
            f"barr lifting expects a relation on variables, got ({universe.term(s)}, "
            f"{universe.term(t)})"
        )
    return a_vars


def barr_lift(a_vars: Rel) -> Rel:
    """Ŝa by shape recursion: same shape, variable leaves pointwise related.

    Raises:
        ValueError: If a_vars relates a non-variable term.
    """
    a_vars = _variable_part(a_vars)
    return _fold(a_vars.universe, a_vars.row)


def barr_lift_lfp(a_vars: Rel) -> Rel:
    """Ŝa as the fixed point μx. (η°;a;η) ∨ compreff(x)."""
    a_vars = _variable_part(a_vars)
    return kleene_lfp(lambda x: join(a_vars, compreff(x)), a_vars.universe)


def parallel_ext(es: ESystem, universe: Universe) -> Rel:
    """a^SP = μx. a[Δ] ∨ compref(x)."""
    ground = ground_instances(es, universe)
    return kleene_lfp(lambda x: join(ground, compref(x)), universe)


def full_ext(es: ESystem, universe: Universe) -> Rel:
    """a^SF, unfolded as a catamorphism over the layered universe.

    Each node first takes the full images of its arguments, then may
    contract the resulting term once more at the root.
    """
    ground_rows = ground_instances(es, universe).rows
    return _fold(universe, lambda v: (v,), lambda w: ground_rows.get(w, ()))


def howe_ext(es: ESystem, universe: Universe) -> Rel:
    """a^SH = μx. compref(x);a[Δ]^=."""
    closing = refl_close(ground_instances(es, universe))
    return kleene_lfp(lambda x: compose(compref(x), closing), universe)


def scc_ext(es: ESystem, universe: Universe) -> Rel:
    """a^SCC = μx. a[x] ∨ compref(x)."""
    rules = rule_rel(es, universe)
    return kleene_lfp(lambda x: join(rel_subst(rules, x), compref(x)), universe)


def seq_ext(es: ESystem, universe: Universe, instances: bool = True) -> Rel:
    """Sequential reduction μx. a[Δ] ∨ linear_refine(x).

    With instances=False the raw rule pairs replace a[Δ].
    """
    base = ground_instances(es, universe) if instances else rule_rel(es, universe)
    return kleene_lfp(lambda x: join(base, linear_refine(x)), universe)


def extensional(es: ESystem, universe: Universe, mode: str) -> Rel:
    """Extensional relation for a reduction mode name."""
    builders: dict[str, Callable[[ESystem, Universe], Rel]] = {
        "ground": ground_instances,
        "seq": seq_ext,
        "parallel": parallel_ext,
        "full": full_ext,
        "scc": scc_ext,
    }
    try:
        builder = builders[mode]
    except KeyError:
        raise ValueError(f"unknown reduction mode {mode!r}") from None
    relation = builder(es, universe)
    logger.debug("ops.extensional_built", mode=mode, pairs=len(relation))
    return relation
