"""Tests for seeded random relations."""

import numpy as np

from relrewrite.core.rel import converse, identity
from relrewrite.core.sampling import ground_ids, random_rel, random_var_rel
from tests.conftest import ZERO, add, succ


class TestRandomRel:

    def test_support_depth(self, add_u3, rng):
        a = random_rel(add_u3, rng, support_depth=1, density=0.5)
        assert a
        assert all(add_u3.depth_of(s) == 1 and add_u3.depth_of(t) == 1 for s, t in a)

    def test_max_pairs(self, add_u3, rng):
        assert len(random_rel(add_u3, rng, density=1.0, max_pairs=10)) <= 10

    def test_reflexive_closure(self, add_u2, rng):
        assert identity(add_u2) <= random_rel(add_u2, rng, closure="reflexive")

    def test_symmetric_closure(self, add_u2, rng):
        a = random_rel(add_u2, rng, density=0.2, closure="symmetric")
        assert converse(a) == a

    def test_explicit_ids(self, add_u3, rng):
        ids = [add_u3.id_of(ZERO), add_u3.id_of(succ(ZERO))]
        a = random_rel(add_u3, rng, density=1.0, ids=ids)
        assert {i for pair in a for i in pair} <= set(ids)

    def test_no_candidates(self, add_u3, rng):
        assert not random_rel(add_u3, rng, ids=[])

    def test_seeded(self, add_u3):
        first = random_rel(add_u3, np.random.default_rng(9))
        second = random_rel(add_u3, np.random.default_rng(9))
        assert first == second


class TestHelpers:

    def test_ground_ids(self, add_u3):
        terms = {add_u3.term(i) for i in ground_ids(add_u3, 2)}
        assert terms == {ZERO, succ(ZERO), add(ZERO, ZERO)}

    def test_random_var_rel(self, add_u3, rng):
        a = random_var_rel(add_u3, rng, density=1.0)
        assert len(a) == 4
        assert all(add_u3.is_var(s) and add_u3.is_var(t) for s, t in a)
