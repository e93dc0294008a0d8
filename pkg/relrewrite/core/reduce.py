"""Reduct enumerators for each reduction relation.

These compute forward images on concrete terms with no depth bound. They
are the reference semantics the bounded relations of the ops module are
checked against. Images are finite because rule left-hand sides are never
variables and right-hand sides only use left-hand-side variables.
"""

from __future__ import annotations

import itertools
from collections.abc import Callable, Hashable, Iterable
from functools import lru_cache
from typing import Literal, TypeVar

from relrewrite.core.term import (
    ESystem,
    Node,
    Term,
    Var,
    apply_subst,
    match_term,
    positions,
    replace_at,
    subterm_at,
    variables,
)

Mode = Literal["ground", "seq", "parallel", "full", "scc"]
MODES: tuple[Mode, ...] = ("ground", "seq", "parallel", "full", "scc")

T = TypeVar("T", bound=Hashable)

_CACHE_SIZE = 1 << 16


@lru_cache(maxsize=_CACHE_SIZE)
def ground_image(t: Term, es: ESystem, instances: bool = True) -> frozenset[Term]:
    """Root contractions of t.

    With instances=False only literal rule left-hand sides are contracted.
    """
    if isinstance(t, Var):
        return frozenset()
    if not instances:
        return frozenset(rule.rhs for rule in es.rules if rule.lhs == t)
    reducts = set()
    for rule in es.rules:
        binding = match_term(rule.lhs, t)
        if binding is not None:
            reducts.add(apply_subst(rule.rhs, binding))
    return frozenset(reducts)


@lru_cache(maxsize=_CACHE_SIZE)
def seq_image(t: Term, es: ESystem, instances: bool = True) -> frozenset[Term]:
    """One contraction at one position."""
    reducts = set()
    for position in positions(t):
        for contractum in ground_image(subterm_at(t, position), es, instances):
            reducts.add(replace_at(t, position, contractum))
    return frozenset(reducts)


def _rebuilt(t: Node, options: list[frozenset[Term]]) -> set[Term]:
    return {Node(t.symbol, combo) for combo in itertools.product(*options)}


@lru_cache(maxsize=_CACHE_SIZE)
def parallel_image(t: Term, es: ESystem) -> frozenset[Term]:
    """Contract any set of disjoint redexes at once."""
    match t:
        case Var():
            return frozenset((t,))
        case Node(_, children):
            reducts = _rebuilt(t, [parallel_image(c, es) for c in children])
            reducts |= ground_image(t, es)
            return frozenset(reducts)


@lru_cache(maxsize=_CACHE_SIZE)
def full_image(t: Term, es: ESystem) -> frozenset[Term]:
    """Reduce the arguments fully, then optionally contract at the root."""
    match t:
        case Var():
            return frozenset((t,))
        case Node(_, children):
            reducts: set[Term] = set()
            for u in _rebuilt(t, [full_image(c, es) for c in children]):
                reducts.add(u)
                reducts |= ground_image(u, es)
            return frozenset(reducts)


@lru_cache(maxsize=_CACHE_SIZE)
def scc_image(t: Term, es: ESystem) -> frozenset[Term]:
    """Rule instances whose substitution part is itself reduced, under any context."""
    match t:
        case Var():
            return frozenset((t,))
        case Node(_, children):
            reducts = _rebuilt(t, [scc_image(c, es) for c in children])
            for rule in es.rules:
                binding = match_term(rule.lhs, t)
                if binding is None:
                    continue
                names = variables(rule.rhs)
                options = [scc_image(binding[name], es) for name in names]
                for combo in itertools.product(*options):
                    reducts.add(apply_subst(rule.rhs, dict(zip(names, combo))))
            return frozenset(reducts)


def reduce_image(t: Term, es: ESystem, mode: Mode, instances: bool = True) -> frozenset[Term]:
    """Image of t under the named reduction relation.

    Raises:
        ValueError: For an unknown mode.
    """
    match mode:
        case "ground":
            return ground_image(t, es, instances)
        case "seq":
            return seq_image(t, es, instances)
        case "parallel":
            return parallel_image(t, es)
        case "full":
            return full_image(t, es)
        case "scc":
            return scc_image(t, es)
    raise ValueError(f"unknown reduction mode {mode!r}")


def stepper(es: ESystem, mode: Mode, instances: bool = True) -> Callable[[Term], frozenset[Term]]:
    """One-argument image function for a fixed system and mode."""
    return lambda t: reduce_image(t, es, mode, instances)


def reachable(start: T, step: Callable[[T], Iterable[T]], steps: int) -> frozenset[T]:
    """Everything reachable from start in at most `steps` steps, start included."""
    seen = {start}
    frontier = {start}
    for _ in range(steps):
        nxt: set[T] = set()
        for item in frontier:
            nxt.update(step(item))
        frontier = nxt - seen
        if not frontier:
            break
        seen |= frontier
    return frozenset(seen)


def reducts_within(start: T, step: Callable[[T], Iterable[T]], steps: int) -> frozenset[T]:
    """Union of the k-step images for 1 ≤ k ≤ steps (start only if reached)."""
    found: set[T] = set()
    layer: set[T] = {start}
    visited: set[T] = set()
    for _ in range(steps):
        nxt: set[T] = set()
        for item in layer - visited:
            nxt.update(step(item))
        visited |= layer
        found |= nxt
        layer = nxt
        if not layer - visited:
            break
    return frozenset(found)


def is_normal(t: Term, es: ESystem) -> bool:
    """True when no subterm of t is a redex."""
    return not seq_image(t, es)
