"""Tests for bounded term universes."""

import pytest

from relrewrite.core.term import Node, Signature, Var, VarSet, depth
from relrewrite.core.universe import (
    UniverseTooLargeError,
    enumerate_universe,
    universe_for,
    universe_size,
)
from tests.conftest import ZERO, add, succ

SIG = Signature((("add", 2), ("succ", 1), ("zero", 0)))
VARS = VarSet(("x", "y"))


class TestSize:

    @pytest.mark.parametrize("d, expected", [(1, 3), (2, 15), (3, 243)])
    def test_add_signature(self, d, expected):
        assert universe_size(SIG, VARS, d) == expected

    def test_matches_enumeration(self):
        assert len(enumerate_universe(SIG, VARS, 3)) == universe_size(SIG, VARS, 3)

    def test_constants_only_do_not_grow(self):
        sig = Signature((("a", 0), ("b", 0)))
        assert universe_size(sig, VarSet(), 4) == 2


class TestEnumeration:

    def test_leaves_first(self, add_u2):
        assert add_u2.terms[:3] == (Var("x"), Var("y"), ZERO)
        assert add_u2.var_ids == [0, 1]

    def test_every_term_within_depth(self, add_u3):
        assert all(depth(t) <= 3 for t in add_u3)

    def test_no_duplicates(self, add_u3):
        assert len(set(add_u3.terms)) == len(add_u3)

    def test_subterm_closed(self, add_u3):
        for t in add_u3:
            if isinstance(t, Node):
                assert all(c in add_u3 for c in t.children)

    def test_children_before_parents(self, add_u3):
        for i in range(len(add_u3)):
            assert all(c < i for c in add_u3.children_of(i))

    def test_prefix_stable(self, add_u2, add_u3):
        assert add_u3.terms[:len(add_u2)] == add_u2.terms
        assert list(add_u3.ids_up_to(2)) == list(range(len(add_u2)))

    def test_layered_order(self, add_u2):
        names = [str(add_u2.term(i)) for i in range(len(add_u2))]
        assert names[:4] == ["x", "y", "zero", "add(x,x)"]
        assert names[-3:] == ["succ(x)", "succ(y)", "succ(zero)"]

    def test_depth_one_is_leaves(self):
        universe = enumerate_universe(SIG, VARS, 1)
        assert len(universe) == 3

    def test_invalid_depth(self):
        with pytest.raises(ValueError):
            enumerate_universe(SIG, VARS, 0)


class TestLookup:

    def test_id_of_and_term(self, add_u3):
        t = succ(add(ZERO, Var("x")))
        assert add_u3.term(add_u3.id_of(t)) == t

    def test_id_of_outside(self, add_u2):
        with pytest.raises(KeyError):
            add_u2.id_of(succ(succ(ZERO)))

    def test_node_id(self, add_u2):
        zero = add_u2.id_of(ZERO)
        assert add_u2.node_id("succ", (zero,)) == add_u2.id_of(succ(ZERO))
        assert add_u2.node_id("succ", (add_u2.id_of(succ(ZERO)),)) is None

    def test_instantiate(self, add_u3):
        zero = add_u3.id_of(ZERO)
        assert add_u3.instantiate(succ(Var("x")), {"x": zero}) == add_u3.id_of(succ(ZERO))

    def test_instantiate_outside(self, add_u2):
        one = add_u2.id_of(succ(ZERO))
        assert add_u2.instantiate(succ(Var("x")), {"x": one}) is None

    def test_structure_accessors(self, add_u2):
        i = add_u2.id_of(add(ZERO, Var("y")))
        assert add_u2.symbol_of(i) == "add"
        assert add_u2.children_of(i) == (add_u2.id_of(ZERO), add_u2.var_id("y"))
        assert add_u2.depth_of(i) == 2
        assert add_u2.is_var(add_u2.var_id("x"))


class TestCap:

    def test_cap_argument(self):
        with pytest.raises(UniverseTooLargeError, match="243"):
            enumerate_universe(SIG, VARS, 3, cap=100)

    def test_cap_from_environment(self, monkeypatch, add_es):
        monkeypatch.setenv("RELWRITE_UNIVERSE_CAP", "20")
        with pytest.raises(UniverseTooLargeError):
            universe_for(add_es, 3)

    def test_back_reference(self, add_es):
        assert universe_for(add_es, 1).esystem is add_es
