"""First-order syntax: signatures, terms, substitutions and positions.

Terms are immutable and hashable, so they can be used as set members and
dictionary keys throughout the relational layer. Matching and unification
follow the usual syntactic algorithms; unification performs the occurs check.
"""

from __future__ import annotations

from collections.abc import Iterator, Mapping
from dataclasses import dataclass

Position = tuple[int, ...]
Subst = Mapping[str, "Term"]


class TermError(Exception):
    """Raised for ill-formed terms, signatures or E-systems."""


class InvalidPositionError(TermError):
    """Raised when a position does not address a subterm."""


@dataclass(frozen=True, slots=True)
class Var:
    """A variable leaf."""
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class Node:
    """An operation symbol applied to its arguments (constants have none)."""
    symbol: str
    children: tuple[Term, ...] = ()

    def __str__(self) -> str:
        if not self.children:
            return self.symbol
        return f"{self.symbol}({','.join(str(c) for c in self.children)})"


Term = Var | Node


@dataclass(frozen=True)
class Signature:
    """Ordered operation symbols with their arities.

    Attributes:
        entries: (symbol, arity) pairs in declaration order.
    """
    entries: tuple[tuple[str, int], ...]

    @property
    def symbols(self) -> tuple[str, ...]:
        return tuple(symbol for symbol, _ in self.entries)

    def arity(self, symbol: str) -> int | None:
        for name, arity in self.entries:
            if name == symbol:
                return arity
        return None

    def __contains__(self, symbol: object) -> bool:
        return any(name == symbol for name, _ in self.entries)

    def __str__(self) -> str:
        return " ".join(f"{name}/{arity}" for name, arity in self.entries)


@dataclass(frozen=True)
class VarSet:
    """Declared variable names, in declaration order."""
    names: tuple[str, ...] = ()

    def __contains__(self, name: object) -> bool:
        return name in self.names

    def __iter__(self) -> Iterator[str]:
        return iter(self.names)

    def __len__(self) -> int:
        return len(self.names)


@dataclass(frozen=True)
class Rule:
    """A rewrite rule lhs -> rhs."""
    lhs: Term
    rhs: Term

    def __str__(self) -> str:
        return f"{self.lhs} -> {self.rhs}"


@dataclass(frozen=True)
class ESystem:
    """A signature, a variable set and a finite set of rules.

    Construction validates every invariant and raises TermError with all
    violations joined.

    Attributes:
        sig: Operation symbols and arities.
        vars: Declared variables, disjoint from the symbols.
        rules: Rewrite rules over (sig, vars).
    """
    sig: Signature
    vars: VarSet
    rules: tuple[Rule, ...] = ()

    def __post_init__(self) -> None:
        from relrewrite.core.validator import validate_esystem

        result = validate_esystem(self)
        if not result.is_valid:
            raise TermError("; ".join(result.violations))

    @property
    def max_rule_depth(self) -> int:
        return max((max(depth(r.lhs), depth(r.rhs)) for r in self.rules), default=0)


def depth(t: Term) -> int:
    """Depth with leaves (variables and constants) at depth 1."""
    match t:
        case Var():
            return 1
        case Node(_, children):
            return 1 + max((depth(c) for c in children), default=0)


def size(t: Term) -> int:
    """Number of symbol and variable occurrences."""
    match t:
        case Var():
            return 1
        case Node(_, children):
            return 1 + sum(size(c) for c in children)


def variables(t: Term) -> tuple[str, ...]:
    """Distinct variable names of t in pre-order of first occurrence."""
    seen: dict[str, None] = {}
    stack = [t]
    while stack:
        current = stack.pop()
        match current:
            case Var(name):
                seen.setdefault(name, None)
            case Node(_, children):
                stack.extend(reversed(children))
    return tuple(seen)


def variable_depths(t: Term, at: int = 1) -> dict[str, int]:
    """Deepest occurrence depth of each variable (root at depth 1)."""
    found: dict[str, int] = {}
    stack = [(t, at)]
    while stack:
        current, level = stack.pop()
        match current:
            case Var(name):
                found[name] = max(found.get(name, 0), level)
            case Node(_, children):
                stack.extend((c, level + 1) for c in children)
    return found


def is_linear(t: Term) -> bool:
    """True when no variable occurs twice in t."""
    names: list[str] = []
    stack = [t]
    while stack:
        current = stack.pop()
        match current:
            case Var(name):
                names.append(name)
            case Node(_, children):
                stack.extend(children)
    return len(names) == len(set(names))


def apply_subst(t: Term, subst: Subst) -> Term:
    """Simultaneously replace bound variables; unbound ones are kept."""
    match t:
        case Var(name):
            return subst.get(name, t)
        case Node(symbol, children):
            if not children:
                return t
            return Node(symbol, tuple(apply_subst(c, subst) for c in children))


def compose_subst(first: Subst, second: Subst) -> dict[str, Term]:
    """Substitution equal to applying `first` and then `second`."""
    composed = {name: apply_subst(term, second) for name, term in first.items()}
    for name, term in second.items():
        composed.setdefault(name, term)
    return composed


def match_term(pattern: Term, subject: Term) -> dict[str, Term] | None:
    """Find the substitution γ with pattern·γ = subject, binding vars(pattern) only.

    Args:
        pattern: Term whose variables are bound by the match.
        subject: Term to decompose.

    Returns:
        The unique matching substitution, or None when none exists.
    """
    binding: dict[str, Term] = {}
    stack = [(pattern, subject)]
    while stack:
        p, s = stack.pop()
        match p:
            case Var(name):
                bound = binding.get(name)
                if bound is None:
                    binding[name] = s
                elif bound != s:
                    return None
            case Node(symbol, children):
                if not isinstance(s, Node) or s.symbol != symbol:
                    return None
                if len(s.children) != len(children):
                    return None
                stack.extend(zip(children, s.children))
    return binding


def _walk(t: Term, binding: dict[str, Term]) -> Term:
    while isinstance(t, Var) and t.name in binding:
        t = binding[t.name]
    return t


def _occurs(name: str, t: Term, binding: dict[str, Term]) -> bool:
    stack = [t]
    while stack:
        current = _walk(stack.pop(), binding)
        match current:
            case Var(other):
                if other == name:
                    return True
            case Node(_, children):
                stack.extend(children)
    return False


def _resolve(t: Term, binding: dict[str, Term]) -> Term:
    t = _walk(t, binding)
    match t:
        case Var():
            return t
        case Node(symbol, children):
            return Node(symbol, tuple(_resolve(c, binding) for c in children))


def unify(left: Term, right: Term) -> dict[str, Term] | None:
    """Most general unifier of two terms, with occurs check.

    Returns:
        An idempotent substitution γ with left·γ = right·γ, or None on a symbol
        clash or an occurs-check failure.
    """
    binding: dict[str, Term] = {}
    stack = [(left, right)]
    while stack:
        a, b = stack.pop()
        a = _walk(a, binding)
        b = _walk(b, binding)
        if a == b:
            continue
        if isinstance(a, Var):
            if _occurs(a.name, b, binding):
                return None
            binding[a.name] = b
            continue
        if isinstance(b, Var):
            if _occurs(b.name, a, binding):
                return None
            binding[b.name] = a
            continue
        if a.symbol != b.symbol or len(a.children) != len(b.children):
            return None
        stack.extend(zip(a.children, b.children))
    return {name: _resolve(term, binding) for name, term in binding.items()}


def format_position(position: Position) -> str:
    """Dotted path, with ε for the root."""
    return ".".join(str(i) for i in position) if position else "ε"


def positions(t: Term) -> list[Position]:
    """All positions of t in pre-order."""
    found: list[Position] = []
    stack: list[tuple[Term, Position]] = [(t, ())]
    while stack:
        current, path = stack.pop()
        found.append(path)
        if isinstance(current, Node):
            stack.extend(
                (child, path + (i,)) for i, child in reversed(list(enumerate(current.children)))
            )
    return found


def subterm_at(t: Term, position: Position) -> Term:
    """Subterm of t at position.

    Raises:
        InvalidPositionError: naming the longest prefix that could not be followed.
    """
    current = t
    for depth_index, i in enumerate(position):
        if not isinstance(current, Node) or not 0 <= i < len(current.children):
            raise InvalidPositionError(
                f"invalid position {format_position(position[:depth_index + 1])} in {t}"
            )
        current = current.children[i]
    return current


def replace_at(t: Term, position: Position, replacement: Term) -> Term:
    """Replace the single occurrence at position by replacement.

    Raises:
        InvalidPositionError: as for subterm_at.
    """
    subterm_at(t, position)
    return _replace(t, position, replacement)


def _replace(t: Term, position: Position, replacement: Term) -> Term:
    if not position:
        return replacement
    assert isinstance(t, Node)
    head, rest = position[0], position[1:]
    children = list(t.children)
    children[head] = _replace(children[head], rest, replacement)
    return Node(t.symbol, tuple(children))
