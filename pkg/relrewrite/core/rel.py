"""Finite binary relations over a universe and the Kleene fixed-point engine.

A Rel is a frozen set of (source id, target id) pairs tied to one carrier
(a Universe, or any sized carrier such as the shape carrier used for
sequentialisation). Relations over different carriers never mix.
Composition switches to numpy boolean matrices once both operands are
dense enough; the two paths are observably identical.
"""

from __future__ import annotations

import os
from collections.abc import Callable, Iterable, Iterator
from typing import Protocol

import numpy as np
import structlog

logger = structlog.get_logger(__name__)

DENSE_THRESHOLD = float(os.environ.get("RELWRITE_DENSE_THRESHOLD", "0.05"))
LFP_SPOT_CHECKS = int(os.environ.get("RELWRITE_LFP_SPOT_CHECKS", "2"))

# Matrices above this side length are never materialised.
_DENSE_MAX_SIDE = 4096

Pair = tuple[int, int]


class Carrier(Protocol):
    def __len__(self) -> int: ...


class UniverseMismatchError(Exception):
    """Raised when relations over different carriers are combined."""


class NonMonotoneError(Exception):
    """Raised when a fixed-point operator is observed not to be monotone."""


class FixpointDivergenceError(Exception):
    """Raised when Kleene iteration exceeds its |U|²+1 bound."""


class Rel:
    """An immutable endorelation on a finite carrier.

    Attributes:
        universe: The carrier the ids refer to.
        pairs: The related (source, target) id pairs.
    """

    __slots__ = ("universe", "pairs", "_rows", "_matrix")

    def __init__(self, universe: Carrier, pairs: Iterable[Pair] = ()):
        self.universe = universe
        self.pairs: frozenset[Pair] = frozenset(pairs)
        self._rows: dict[int, frozenset[int]] | None = None
        self._matrix: np.ndarray | None = None

    @classmethod
    def checked(cls, universe: Carrier, pairs: Iterable[Pair]) -> Rel:
        """Build a Rel, rejecting ids outside the carrier."""
        rel = cls(universe, pairs)
        n = len(universe)
        bad = [p for p in rel.pairs if not (0 <= p[0] < n and 0 <= p[1] < n)]
        if bad:
            raise ValueError(f"pair {min(bad)} has ids outside a carrier of size {n}")
        return rel

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[Pair]:
        return iter(self.pairs)

    def __contains__(self, pair: object) -> bool:
        return pair in self.pairs

    def __bool__(self) -> bool:
        return bool(self.pairs)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Rel):
            return NotImplemented
        return self.universe is other.universe and self.pairs == other.pairs

    def __hash__(self) -> int:
        return hash((id(self.universe), self.pairs))

    def __repr__(self) -> str:
        return f"Rel({len(self.pairs)} pairs over {len(self.universe)})"

    def __le__(self, other: Rel) -> bool:
        return leq(self, other)

    def __or__(self, other: Rel) -> Rel:
        return join(self, other)

    def __and__(self, other: Rel) -> Rel:
        return meet(self, other)

    @property
    def rows(self) -> dict[int, frozenset[int]]:
        """Successor sets by source id (sources without successors omitted)."""
        if self._rows is None:
            grouped: dict[int, set[int]] = {}
            for source, target in self.pairs:
                grouped.setdefault(source, set()).add(target)
            self._rows = {k: frozenset(v) for k, v in grouped.items()}
        return self._rows

    def row(self, source: int) -> frozenset[int]:
        return self.rows.get(source, frozenset())

    @property
    def density(self) -> float:
        n = len(self.universe)
        return len(self.pairs) / (n * n) if n else 0.0

    def matrix(self) -> np.ndarray:
        """Dense boolean adjacency matrix (cached)."""
        if self._matrix is None:
            n = len(self.universe)
            m = np.zeros((n, n), dtype=bool)
            if self.pairs:
                flat = (i for pair in self.pairs for i in pair)
                idx = np.fromiter(flat, dtype=np.int64, count=2 * len(self.pairs)).reshape(-1, 2)
                m[idx[:, 0], idx[:, 1]] = True
            self._matrix = m
        return self._matrix

    def sorted_pairs(self) -> list[Pair]:
        return sorted(self.pairs)

    def domain(self) -> frozenset[int]:
        return frozenset(self.rows)

    def range(self) -> frozenset[int]:
        return frozenset(t for _, t in self.pairs)

    def restrict(self, ids: Iterable[int]) -> Rel:
        """Pairs whose source and target both lie in ids."""
        keep = set(ids)
        return Rel(self.universe, ((s, t) for s, t in self.pairs if s in keep and t in keep))


def require_same_universe(a: Rel, b: Rel) -> None:
    if a.universe is not b.universe:
        raise UniverseMismatchError(
            f"cannot combine relations over different carriers ({a.universe!r}, {b.universe!r})"
        )


def identity(universe: Carrier) -> Rel:
    """Δ: the diagonal over the whole carrier."""
    return Rel(universe, ((i, i) for i in range(len(universe))))


def bottom(universe: Carrier) -> Rel:
    """⊥: the empty relation."""
    return Rel(universe)


def top(universe: Carrier) -> Rel:
    """The full relation over the carrier."""
    n = len(universe)
    return Rel(universe, ((i, j) for i in range(n) for j in range(n)))


def converse(a: Rel) -> Rel:
    return Rel(a.universe, ((t, s) for s, t in a.pairs))


def join(a: Rel, b: Rel) -> Rel:
    require_same_universe(a, b)
    return Rel(a.universe, a.pairs | b.pairs)


def meet(a: Rel, b: Rel) -> Rel:
    require_same_universe(a, b)
    return Rel(a.universe, a.pairs & b.pairs)


def leq(a: Rel, b: Rel) -> bool:
    require_same_universe(a, b)
    return a.pairs <= b.pairs


def join_all(universe: Carrier, rels: Iterable[Rel]) -> Rel:
    pairs: set[Pair] = set()
    for rel in rels:
        if rel.universe is not universe:
            raise UniverseMismatchError("cannot join relations over different carriers")
        pairs |= rel.pairs
    return Rel(universe, pairs)


def compose(a: Rel, b: Rel) -> Rel:
    """a;b: (t, s) whenever t a u and u b s for some u in the carrier."""
    require_same_universe(a, b)
    if not a.pairs or not b.pairs:
        return Rel(a.universe)
    n = len(a.universe)
    if n <= _DENSE_MAX_SIDE and min(a.density, b.density) > DENSE_THRESHOLD:
        product = a.matrix().astype(np.float32) @ b.matrix().astype(np.float32)
        return Rel(a.universe, ((int(i), int(j)) for i, j in np.argwhere(product > 0)))
    b_rows = b.rows
    return Rel(
        a.universe,
        ((source, target) for source, mid in a.pairs for target in b_rows.get(mid, ())),
    )


def refl_close(a: Rel) -> Rel:
    """a^= = a ∨ Δ."""
    return join(a, identity(a.universe))


def rtc(a: Rel) -> Rel:
    """a* = μx. Δ ∨ a;x."""
    delta = identity(a.universe)
    return kleene_lfp(lambda x: join(delta, compose(a, x)), a.universe, spot_checks=0)


def random_sample(universe: Carrier, rng: np.random.Generator, count: int | None = None) -> Rel:
    """Sparse random relation with about |U| pairs."""
    n = len(universe)
    if n == 0:
        return Rel(universe)
    count = n if count is None else count
    drawn = rng.integers(0, n, size=(count, 2))
    return Rel(universe, ((int(s), int(t)) for s, t in drawn))


def kleene_lfp(
    operator: Callable[[Rel], Rel],
    universe: Carrier,
    *,
    spot_checks: int | None = None,
    seed: int = 0,
) -> Rel:
    """Least fixed point of a monotone operator, iterating from ⊥.

    Before iterating, F(⊥) ≤ F(sample) is checked on `spot_checks` random
    sparse samples. During iteration every step must grow the relation.

    Args:
        operator: Monotone map on relations over `universe`.
        universe: Carrier of the lattice.
        spot_checks: Number of monotonicity samples; defaults to RELWRITE_LFP_SPOT_CHECKS.
        seed: Seed for the spot-check samples.

    Returns:
        The least x with F(x) = x.

    Raises:
        NonMonotoneError: If a spot check fails or an iterate shrinks.
        FixpointDivergenceError: If more than |U|²+1 iterations are needed.
    """
    checks = LFP_SPOT_CHECKS if spot_checks is None else spot_checks
    x = bottom(universe)
    if checks:
        rng = np.random.default_rng(seed)
        at_bottom = operator(x)
        for trial in range(checks):
            sample = random_sample(universe, rng)
            image = operator(sample)
            if not at_bottom <= image:
                missing = min(at_bottom.pairs - image.pairs)
                logger.error("lfp.non_monotone", trial=trial, missing=missing)
                raise NonMonotoneError(
                    f"operator is not monotone: F(⊥) has pair {missing} missing from F(sample)"
                )

    limit = len(universe) ** 2 + 1
    for iteration in range(limit):
        nxt = operator(x)
        if not x.pairs <= nxt.pairs:
            missing = min(x.pairs - nxt.pairs)
            logger.error("lfp.shrank", iteration=iteration, missing=missing)
            raise NonMonotoneError(
                f"iterate {iteration + 1} lost pair {missing}; operator is not monotone"
            )
        if nxt.pairs == x.pairs:
            logger.debug("lfp.converged", iterations=iteration, pairs=len(x))
            return x
        x = nxt
    raise FixpointDivergenceError(f"no fixed point within {limit} iterations")
