"""Unit tests for terms, substitutions, matching, unification and positions."""

import pytest

from relrewrite.core.term import (
    ESystem,
    InvalidPositionError,
    Node,
    Rule,
    Signature,
    TermError,
    Var,
    VarSet,
    apply_subst,
    compose_subst,
    depth,
    format_position,
    is_linear,
    match_term,
    positions,
    replace_at,
    size,
    subterm_at,
    unify,
    variable_depths,
    variables,
)
from tests.conftest import ZERO, add, succ

X, Y = Var("x"), Var("y")


class TestShape:

    def test_depth_of_leaves(self):
        assert depth(X) == 1
        assert depth(ZERO) == 1

    def test_depth_of_nested(self):
        assert depth(succ(add(ZERO, X))) == 3

    def test_size_counts_every_occurrence(self):
        assert size(add(X, X)) == 3

    def test_str(self):
        assert str(add(ZERO, Y)) == "add(zero,y)"
        assert str(ZERO) == "zero"

    def test_variables_in_first_occurrence_order(self):
        assert variables(add(succ(Y), add(X, Y))) == ("y", "x")

    def test_variable_depths_take_deepest(self):
        assert variable_depths(add(X, succ(X))) == {"x": 3}

    def test_is_linear(self):
        assert is_linear(add(X, Y))
        assert not is_linear(add(X, X))
        assert is_linear(ZERO)


class TestSubstitution:

    def test_apply_replaces_simultaneously(self):
        t = apply_subst(add(X, Y), {"x": Y, "y": X})
        assert t == add(Y, X)

    def test_unbound_variables_kept(self):
        assert apply_subst(add(X, Y), {"x": ZERO}) == add(ZERO, Y)

    def test_compose_applies_first_then_second(self):
        first = {"x": succ(Y)}
        second = {"y": ZERO}
        composed = compose_subst(first, second)
        t = add(X, Y)
        assert apply_subst(t, composed) == apply_subst(apply_subst(t, first), second)


class TestMatch:

    def test_match_binds_pattern_variables(self):
        assert match_term(add(succ(X), Y), add(succ(ZERO), X)) == {"x": ZERO, "y": X}

    def test_symbol_clash(self):
        assert match_term(add(ZERO, Y), add(succ(ZERO), ZERO)) is None

    def test_nonlinear_pattern_needs_equal_subterms(self):
        assert match_term(add(X, X), add(ZERO, ZERO)) == {"x": ZERO}
        assert match_term(add(X, X), add(ZERO, succ(ZERO))) is None

    def test_variable_subject_does_not_match_node(self):
        assert match_term(succ(X), Y) is None


class TestUnify:

    def test_unifier_makes_terms_equal(self):
        left, right = add(X, succ(ZERO)), add(succ(Y), Y)
        mgu = unify(left, right)
        assert mgu is not None
        assert apply_subst(left, mgu) == apply_subst(right, mgu)

    def test_occurs_check(self):
        assert unify(X, succ(X)) is None

    def test_clash(self):
        assert unify(succ(X), ZERO) is None

    def test_identical_terms(self):
        assert unify(add(X, Y), add(X, Y)) == {}

    def test_result_is_idempotent(self):
        mgu = unify(add(X, Y), add(Y, succ(ZERO)))
        assert mgu is not None
        for term in mgu.values():
            assert apply_subst(term, mgu) == term


class TestPositions:

    def test_preorder(self):
        assert positions(add(succ(X), Y)) == [(), (0,), (0, 0), (1,)]

    def test_subterm_at(self):
        assert subterm_at(add(succ(X), Y), (0, 0)) == X

    def test_replace_at(self):
        assert replace_at(add(succ(X), Y), (0,), ZERO) == add(ZERO, Y)

    def test_replace_at_root(self):
        assert replace_at(X, (), ZERO) == ZERO

    def test_invalid_position_names_prefix(self):
        with pytest.raises(InvalidPositionError, match="invalid position 0.0"):
            subterm_at(add(ZERO, X), (0, 0))

    def test_format_position(self):
        assert format_position(()) == "ε"
        assert format_position((1, 0)) == "1.0"


class TestESystem:

    def test_valid_system(self):
        es = ESystem(
            Signature((("f", 1), ("c", 0))), VarSet(("x",)), (Rule(Node("f", (X,)), X),)
        )
        assert es.max_rule_depth == 2

    def test_variable_lhs_rejected(self):
        with pytest.raises(TermError, match="lhs is a variable"):
            ESystem(Signature((("c", 0),)), VarSet(("x",)), (Rule(X, Node("c")),))

    def test_unbound_rhs_variable_rejected(self):
        sig = Signature((("f", 1), ("c", 0)))
        with pytest.raises(TermError, match="rhs variable not bound: y"):
            ESystem(sig, VarSet(("x", "y")), (Rule(Node("f", (X,)), Y),))
