"""Seeded random relations for property checks."""

from __future__ import annotations

from collections.abc import Sequence
from typing import Literal

import numpy as np

from relrewrite.core.rel import Rel, converse, join, refl_close
from relrewrite.core.universe import Universe

Closure = Literal["reflexive", "symmetric"] | None


def random_rel(
    universe: Universe,
    rng: np.random.Generator,
    *,
    support_depth: int | None = None,
    density: float = 0.05,
    max_pairs: int = 400,
    closure: Closure = None,
    ids: Sequence[int] | None = None,
) -> Rel:
    """Random relation whose non-closure pairs use terms of depth ≤ support_depth.

    Args:
        universe: Carrier.
        rng: Source of randomness.
        support_depth: Depth bound for sources and targets (default: the universe depth).
        density: Expected fraction of candidate pairs drawn.
        max_pairs: Upper bound on drawn pairs.
        closure: Optional post-processing to meet a law's precondition.
        ids: Explicit candidate ids, overriding support_depth.

    Returns:
        The generated relation.
    """
    candidates = list(ids) if ids is not None else list(
        universe.ids_up_to(universe.depth if support_depth is None else support_depth)
    )
    rel = Rel(universe)
    if candidates:
        count = min(max_pairs, int(round(density * len(candidates) ** 2)))
        drawn = rng.integers(0, len(candidates), size=(count, 2))
        rel = Rel(universe, ((candidates[int(s)], candidates[int(t)]) for s, t in drawn))
    match closure:
        case "reflexive":
            return refl_close(rel)
        case "symmetric":
            return join(rel, converse(rel))
    return rel


def random_var_rel(universe: Universe, rng: np.random.Generator, density: float = 0.5) -> Rel:
    """Random relation between variable leaves only."""
    var_ids = universe.var_ids
    pairs = [
        (s, t) for s in var_ids for t in var_ids if rng.random() < density
    ]
    return Rel(universe, pairs)


def ground_ids(universe: Universe, support_depth: int) -> list[int]:
    """Ids of variable-free terms of depth ≤ support_depth."""
    return [
        i for i in universe.ids_up_to(support_depth) if not _has_variable(universe, i)
    ]


def _has_variable(universe: Universe, i: int) -> bool:
    if universe.is_var(i):
        return True
    return any(_has_variable(universe, c) for c in universe.children_of(i))
