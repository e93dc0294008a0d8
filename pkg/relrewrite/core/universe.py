"""Bounded term universes with stable integer identities.

A universe U_D holds every well-formed term of depth ≤ D. Ids are assigned
layer by layer: depth-1 leaves first (variables in declaration order, then
constants by symbol), then each deeper layer sorted by symbol and child ids.
Children therefore always have smaller ids than their parents, and the ids
of U_d form a prefix of the ids of U_{d+1}.
"""

from __future__ import annotations

import itertools
import os
from collections.abc import Iterator, Mapping

import structlog

from relrewrite.core.term import ESystem, Node, Signature, Term, Var, VarSet

logger = structlog.get_logger(__name__)

DEFAULT_UNIVERSE_CAP = 20000


class UniverseTooLargeError(Exception):
    """Raised when a universe would exceed the configured cardinality cap."""


class Universe:
    """All terms up to a depth bound, indexed by id.

    Attributes:
        sig: Operation symbols the terms are built from.
        varset: Variables allowed at the leaves.
        depth: Depth bound D.
        terms: Terms ordered by id.
        esystem: The E-system this universe was built for, if any.
    """

    def __init__(
        self,
        sig: Signature,
        varset: VarSet,
        depth: int,
        terms: list[Term],
        layer_ends: list[int],
        esystem: ESystem | None = None,
    ):
        self.sig = sig
        self.varset = varset
        self.depth = depth
        self.terms: tuple[Term, ...] = tuple(terms)
        self.esystem = esystem
        self._layer_ends = layer_ends
        self.index: dict[Term, int] = {t: i for i, t in enumerate(self.terms)}
        self._symbols: list[str | None] = []
        self._children: list[tuple[int, ...]] = []
        self._depths: list[int] = []
        self._nodes: dict[tuple[str, tuple[int, ...]], int] = {}
        for i, t in enumerate(self.terms):
            if isinstance(t, Var):
                self._symbols.append(None)
                self._children.append(())
                self._depths.append(1)
                continue
            child_ids = tuple(self.index[c] for c in t.children)
            self._symbols.append(t.symbol)
            self._children.append(child_ids)
            self._depths.append(1 + max((self._depths[c] for c in child_ids), default=0))
            self._nodes[(t.symbol, child_ids)] = i

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[Term]:
        return iter(self.terms)

    def __contains__(self, t: object) -> bool:
        return t in self.index

    def __repr__(self) -> str:
        return f"Universe(depth={self.depth}, size={len(self)})"

    def id_of(self, t: Term) -> int:
        """Id of t; raises KeyError naming the term when it lies outside U."""
        try:
            return self.index[t]
        except KeyError:
            raise KeyError(f"{t} is not in the depth-{self.depth} universe") from None

    def term(self, i: int) -> Term:
        return self.terms[i]

    def symbol_of(self, i: int) -> str | None:
        """Head symbol, or None for a variable."""
        return self._symbols[i]

    def children_of(self, i: int) -> tuple[int, ...]:
        return self._children[i]

    def depth_of(self, i: int) -> int:
        return self._depths[i]

    def is_var(self, i: int) -> bool:
        return self._symbols[i] is None

    @property
    def var_ids(self) -> list[int]:
        return [i for i in range(len(self.varset))]

    def var_id(self, name: str) -> int:
        return self.index[Var(name)]

    def node_id(self, symbol: str, child_ids: tuple[int, ...]) -> int | None:
        """Id of symbol(children) when that term lies in U, else None."""
        return self._nodes.get((symbol, child_ids))

    def ids_up_to(self, depth: int) -> range:
        """Ids of all terms with depth ≤ depth (a prefix of the id range)."""
        if depth < 1:
            return range(0)
        return range(self._layer_ends[min(depth, self.depth) - 1])

    def instantiate(self, t: Term, env: Mapping[str, int]) -> int | None:
        """Id of t with variables replaced by universe ids, or None if outside U."""
        match t:
            case Var(name):
                bound = env.get(name)
                return bound if bound is not None else self.index.get(t)
            case Node(symbol, children):
                child_ids = []
                for c in children:
                    cid = self.instantiate(c, env)
                    if cid is None:
                        return None
                    child_ids.append(cid)
                return self._nodes.get((symbol, tuple(child_ids)))


def universe_size(sig: Signature, varset: VarSet, depth: int) -> int:
    """Cardinality of U_depth, by the per-layer counting recurrence."""
    if depth < 1:
        return 0
    constants = sum(1 for _, arity in sig.entries if arity == 0)
    cumulative = [0, len(varset) + constants]
    for _ in range(2, depth + 1):
        below, below2 = cumulative[-1], cumulative[-2]
        layer = sum(
            below ** arity - below2 ** arity for _, arity in sig.entries if arity > 0
        )
        cumulative.append(below + layer)
    return cumulative[depth]


def enumerate_universe(
    sig: Signature,
    varset: VarSet,
    depth: int,
    cap: int | None = None,
    esystem: ESystem | None = None,
) -> Universe:
    """Enumerate every well-formed term of depth ≤ depth.

    Ids are assigned layer by layer: variables and constants first, then each
    depth in turn, nodes ordered by symbol and then child ids. Children always
    precede their parents and the ids of a shallower universe are a prefix of
    a deeper one.

    Args:
        sig: Operation symbols.
        varset: Variables usable at the leaves.
        depth: Depth bound, at least 1.
        cap: Cardinality cap; defaults to RELWRITE_UNIVERSE_CAP.
        esystem: Optional owning E-system, kept as a back reference.

    Returns:
        The universe with layered ids.

    Raises:
        ValueError: If depth < 1.
        UniverseTooLargeError: If the universe would exceed the cap.
    """
    if depth < 1:
        raise ValueError(f"universe depth must be at least 1, got {depth}")
    if cap is None:
        cap = int(os.environ.get("RELWRITE_UNIVERSE_CAP", str(DEFAULT_UNIVERSE_CAP)))
    total = universe_size(sig, varset, depth)
    if total > cap:
        logger.warning("universe.cap_exceeded", depth=depth, size=total, cap=cap)
        raise UniverseTooLargeError(
            f"universe of depth {depth} has {total} terms, above the cap of {cap} "
            f"(RELWRITE_UNIVERSE_CAP)"
        )

    terms: list[Term] = [Var(name) for name in varset.names]
    operations = sorted((s, a) for s, a in sig.entries if a > 0)
    terms.extend(Node(s) for s, _ in sorted(e for e in sig.entries if e[1] == 0))
    layer_ends = [len(terms)]
    for _ in range(2, depth + 1):
        below = layer_ends[-1]
        below2 = layer_ends[-2] if len(layer_ends) > 1 else 0
        for symbol, arity in operations:
            for child_ids in itertools.product(range(below), repeat=arity):
                if max(child_ids) < below2:
                    continue
                terms.append(Node(symbol, tuple(terms[c] for c in child_ids)))
        layer_ends.append(len(terms))

    universe = Universe(sig, varset, depth, terms, layer_ends, esystem=esystem)
    logger.debug("universe.enumerated", depth=depth, size=len(universe))
    return universe


def universe_for(es: ESystem, depth: int, cap: int | None = None) -> Universe:
    """Universe over an E-system's signature and variables."""
    return enumerate_universe(es.sig, es.vars, depth, cap=cap, esystem=es)
