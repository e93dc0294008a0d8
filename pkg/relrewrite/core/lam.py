"""Well-scoped de Bruijn λ-terms with β parallel and full reduction.

A term at scope n may use the free indices 0 … n-1; a λ-body lives at
scope n+1. Because binders are nameless, α-equivalent terms are equal
values, so image sets deduplicate up to α for free.
"""

from __future__ import annotations

import itertools
import os
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from functools import lru_cache

import structlog

from relrewrite.core.reduce import reachable

logger = structlog.get_logger(__name__)

DEFAULT_LAMBDA_CAP = 200_000


class ScopeError(Exception):
    """Raised when a term uses an index outside its scope."""


class LambdaCapError(Exception):
    """Raised when a λ enumeration would exceed the configured cap."""


@dataclass(frozen=True, slots=True)
class Var:
    """de Bruijn index."""
    index: int

    def __str__(self) -> str:
        return format_lam(self)


@dataclass(frozen=True, slots=True)
class Lam:
    body: LamTerm

    def __str__(self) -> str:
        return format_lam(self)


@dataclass(frozen=True, slots=True)
class App:
    fun: LamTerm
    arg: LamTerm

    def __str__(self) -> str:
        return format_lam(self)


LamTerm = Var | Lam | App


def format_lam(t: LamTerm) -> str:
    """Render in the `\\.` / juxtaposition / integer syntax."""
    match t:
        case Var(index):
            return str(index)
        case Lam(body):
            return "\\." + format_lam(body)
        case App(fun, arg):
            left = f"({format_lam(fun)})" if isinstance(fun, Lam) else format_lam(fun)
            right = f"({format_lam(arg)})" if isinstance(arg, (Lam, App)) else format_lam(arg)
            return f"{left} {right}"


def lam_size(t: LamTerm) -> int:
    """Node count: every index, abstraction and application counts one."""
    match t:
        case Var():
            return 1
        case Lam(body):
            return 1 + lam_size(body)
        case App(fun, arg):
            return 1 + lam_size(fun) + lam_size(arg)


def min_scope(t: LamTerm) -> int:
    """Smallest scope at which t is well-scoped."""
    match t:
        case Var(index):
            return index + 1
        case Lam(body):
            return max(min_scope(body) - 1, 0)
        case App(fun, arg):
            return max(min_scope(fun), min_scope(arg))


def check_scope(t: LamTerm, scope: int) -> None:
    """Raise ScopeError unless t is well-scoped at scope."""
    needed = min_scope(t)
    if needed > scope:
        raise ScopeError(f"{format_lam(t)} needs scope {needed}, got {scope}")


def shift(t: LamTerm, by: int, cutoff: int = 0) -> LamTerm:
    """Add `by` to every free index ≥ cutoff."""
    match t:
        case Var(index):
            return Var(index + by) if index >= cutoff else t
        case Lam(body):
            return Lam(shift(body, by, cutoff + 1))
        case App(fun, arg):
            return App(shift(fun, by, cutoff), shift(arg, by, cutoff))


def _subst(t: LamTerm, level: int, arg: LamTerm) -> LamTerm:
    match t:
        case Var(index):
            if index == level:
                return shift(arg, level)
            return Var(index - 1) if index > level else t
        case Lam(body):
            return Lam(_subst(body, level + 1, arg))
        case App(fun, fun_arg):
            return App(_subst(fun, level, arg), _subst(fun_arg, level, arg))


def lam_subst(body: LamTerm, arg: LamTerm, scope: int | None = None) -> LamTerm:
    """Capture-avoiding substitution of arg for index 0 in body.

    Args:
        body: Term at scope n+1.
        arg: Term at scope n.
        scope: n, checked when given.

    Returns:
        The substituted term at scope n, remaining free indices shifted down.

    Raises:
        ScopeError: If scope is given and either term is out of scope.
    """
    if scope is not None:
        check_scope(body, scope + 1)
        check_scope(arg, scope)
    return _subst(body, 0, arg)


def rename(t: LamTerm, renaming: Sequence[int]) -> LamTerm:
    """Apply ρ: n → m to the free indices of t (t at scope n = len(renaming))."""
    return _rename(t, tuple(renaming), 0)


def _rename(t: LamTerm, renaming: tuple[int, ...], bound: int) -> LamTerm:
    match t:
        case Var(index):
            if index < bound:
                return t
            return Var(renaming[index - bound] + bound)
        case Lam(body):
            return Lam(_rename(body, renaming, bound + 1))
        case App(fun, arg):
            return App(_rename(fun, renaming, bound), _rename(arg, renaming, bound))


@lru_cache(maxsize=None)
def count_lams(scope: int, size: int) -> int:
    """Number of well-scoped terms of exactly this size."""
    if size < 1:
        return 0
    if size == 1:
        return scope
    total = count_lams(scope + 1, size - 1)
    for left in range(1, size - 1):
        total += count_lams(scope, left) * count_lams(scope, size - 1 - left)
    return total


@lru_cache(maxsize=None)
def _lams_of_size(scope: int, size: int) -> tuple[LamTerm, ...]:
    if size < 1:
        return ()
    if size == 1:
        return tuple(Var(i) for i in range(scope))
    found: list[LamTerm] = [Lam(b) for b in _lams_of_size(scope + 1, size - 1)]
    for left in range(1, size - 1):
        for fun, arg in itertools.product(
            _lams_of_size(scope, left), _lams_of_size(scope, size - 1 - left)
        ):
            found.append(App(fun, arg))
    return tuple(found)


def enumerate_lams(scope: int, size: int, cap: int | None = None) -> list[LamTerm]:
    """All terms well-scoped at `scope` with at most `size` nodes, by ascending size.

    Raises:
        ValueError: If size < 1.
        LambdaCapError: If the count exceeds the cap (RELWRITE_LAMBDA_CAP).
    """
    if size < 1:
        raise ValueError(f"term size must be at least 1, got {size}")
    if cap is None:
        cap = int(os.environ.get("RELWRITE_LAMBDA_CAP", str(DEFAULT_LAMBDA_CAP)))
    total = sum(count_lams(scope, k) for k in range(1, size + 1))
    if total > cap:
        raise LambdaCapError(
            f"{total} terms at scope {scope} up to size {size}, above the cap of {cap}"
        )
    terms = [t for k in range(1, size + 1) for t in _lams_of_size(scope, k)]
    logger.debug("lambda.enumerated", scope=scope, size=size, count=len(terms))
    return terms


@lru_cache(maxsize=1 << 16)
def lam_parallel_image(t: LamTerm) -> frozenset[LamTerm]:
    """Parallel β: reduce disjoint redexes, contracting a root redex with unreduced parts."""
    match t:
        case Var():
            return frozenset((t,))
        case Lam(body):
            return frozenset(Lam(b) for b in lam_parallel_image(body))
        case App(fun, arg):
            reducts = {
                App(f, a)
                for f, a in itertools.product(lam_parallel_image(fun), lam_parallel_image(arg))
            }
            if isinstance(fun, Lam):
                reducts.add(lam_subst(fun.body, arg))
            return frozenset(reducts)


@lru_cache(maxsize=1 << 16)
def lam_full_image(t: LamTerm) -> frozenset[LamTerm]:
    """Full β: reduce the parts, then optionally contract the rebuilt root."""
    match t:
        case Var():
            return frozenset((t,))
        case Lam(body):
            return frozenset(Lam(b) for b in lam_full_image(body))
        case App(fun, arg):
            reducts: set[LamTerm] = set()
            for f, a in itertools.product(lam_full_image(fun), lam_full_image(arg)):
                reducts.add(App(f, a))
                if isinstance(f, Lam):
                    reducts.add(lam_subst(f.body, a))
            return frozenset(reducts)


def _leftmost_step(t: LamTerm) -> LamTerm | None:
    match t:
        case Var():
            return None
        case Lam(body):
            inner = _leftmost_step(body)
            return None if inner is None else Lam(inner)
        case App(fun, arg):
            if isinstance(fun, Lam):
                return lam_subst(fun.body, arg)
            inner = _leftmost_step(fun)
            if inner is not None:
                return App(inner, arg)
            inner = _leftmost_step(arg)
            return None if inner is None else App(fun, inner)


def lam_normalize(t: LamTerm, max_steps: int = 1000) -> LamTerm | None:
    """β-normal form by leftmost-outermost reduction, or None past max_steps."""
    for _ in range(max_steps):
        nxt = _leftmost_step(t)
        if nxt is None:
            return t
        t = nxt
    return None


LamImage = Callable[[LamTerm], frozenset[LamTerm]]


@dataclass
class ScopedRel:
    """A scope-indexed family of relations on λ-terms.

    Attributes:
        family: Pairs (t, s) per scope n, both terms well-scoped at n.
    """
    family: dict[int, frozenset[tuple[LamTerm, LamTerm]]] = field(default_factory=dict)

    def related(self, scope: int, source: LamTerm, target: LamTerm) -> bool:
        return (source, target) in self.family.get(scope, frozenset())


def scoped_rel(image: LamImage, max_scope: int, max_size: int) -> ScopedRel:
    """Tabulate an image function on every term up to max_scope and max_size."""
    family = {
        n: frozenset((t, s) for t in enumerate_lams(n, max_size) for s in image(t))
        for n in range(max_scope + 1)
    }
    return ScopedRel(family)


@dataclass
class RenamingReport:
    """Outcome of the renaming and weakening closure check.

    Attributes:
        passed: Whether every renaming commuted with the image.
        checked: Number of (term, renaming) combinations examined.
        witness: (term, renaming, source scope) of the first failure.
    """
    passed: bool
    checked: int = 0
    witness: tuple[LamTerm, tuple[int, ...], int] | None = None


def renaming_closure_check(image: LamImage, max_scope: int, max_size: int) -> RenamingReport:
    """Check image(tρ) = image(t)ρ for every renaming ρ: n → m with n, m ≤ max_scope.

    Renamings include weakenings (injective, into a larger scope) and
    contractions of distinct indices.
    """
    relation = scoped_rel(image, max_scope, max_size)
    checked = 0
    for n, m in itertools.product(range(max_scope + 1), repeat=2):
        for renaming in itertools.product(range(m), repeat=n):
            for t in enumerate_lams(n, max_size):
                checked += 1
                moved = rename(t, renaming)
                expected = frozenset(rename(s, renaming) for s in image(t))
                closed = all(relation.related(m, moved, s) for s in expected)
                if image(moved) != expected or not closed:
                    logger.info(
                        "lambda.renaming_failed", term=format_lam(t), renaming=renaming
                    )
                    return RenamingReport(False, checked, (t, renaming, n))
    return RenamingReport(True, checked)


def lam_join_within(left: LamTerm, right: LamTerm, image: LamImage, steps: int) -> bool:
    """True when left and right reach a common term within `steps` steps each."""
    return bool(reachable(left, image, steps) & reachable(right, image, steps))
