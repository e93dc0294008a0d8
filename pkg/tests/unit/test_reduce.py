"""Tests for the unbounded reduct enumerators."""

import pytest

from relrewrite.core.reduce import (
    MODES,
    full_image,
    ground_image,
    is_normal,
    parallel_image,
    reachable,
    reduce_image,
    reducts_within,
    scc_image,
    seq_image,
    stepper,
)
from relrewrite.core.term import Var
from tests.conftest import ZERO, add, succ


class TestWorkedExample:

    def test_root_contraction_cannot_reach_inside(self, add_es):
        assert ground_image(succ(add(ZERO, ZERO)), add_es) == frozenset()

    def test_parallel_reduces_under_context(self, add_es):
        assert succ(ZERO) in parallel_image(succ(add(ZERO, ZERO)), add_es)


class TestImages:

    def test_ground_instances(self, add_es):
        assert ground_image(add(succ(ZERO), ZERO), add_es) == {succ(add(ZERO, ZERO))}

    def test_raw_rules_only_match_literally(self, add_es):
        assert ground_image(add(ZERO, ZERO), add_es, instances=False) == frozenset()
        assert ground_image(add(ZERO, Var("y")), add_es, instances=False) == {Var("y")}

    def test_variables_have_no_root_steps(self, add_es):
        assert ground_image(Var("x"), add_es) == frozenset()

    def test_seq_contracts_one_position(self, add_es):
        assert seq_image(add(ZERO, add(ZERO, ZERO)), add_es) == {add(ZERO, ZERO)}

    def test_parallel_is_reflexive(self, add_es):
        t = add(ZERO, add(ZERO, ZERO))
        assert parallel_image(t, add_es) == {t, add(ZERO, ZERO)}

    def test_full_contracts_nested_redexes(self, add_es):
        t = add(ZERO, add(ZERO, ZERO))
        assert ZERO in full_image(t, add_es)
        assert ZERO not in parallel_image(t, add_es)

    def test_scc_reduces_the_substitution_part(self, add_es):
        assert ZERO in scc_image(add(ZERO, add(ZERO, ZERO)), add_es)

    def test_variable_images(self, add_es):
        x = Var("x")
        assert parallel_image(x, add_es) == {x}
        assert full_image(x, add_es) == {x}
        assert seq_image(x, add_es) == frozenset()

    @pytest.mark.parametrize("mode", MODES)
    def test_dispatch(self, add_es, mode):
        t = succ(add(ZERO, ZERO))
        assert reduce_image(t, add_es, mode) == stepper(add_es, mode)(t)

    def test_unknown_mode(self, add_es):
        with pytest.raises(ValueError, match="unknown reduction mode"):
            reduce_image(ZERO, add_es, "leftmost")

    def test_normal_forms(self, add_es):
        assert is_normal(succ(ZERO), add_es)
        assert not is_normal(succ(add(ZERO, ZERO)), add_es)


class TestReachability:

    def test_reachable_includes_start(self):
        step = lambda n: {n + 1} if n < 3 else set()  # noqa: E731
        assert reachable(0, step, 2) == {0, 1, 2}
        assert reachable(0, step, 10) == {0, 1, 2, 3}

    def test_reducts_within_excludes_unreached_start(self):
        step = lambda n: {n + 1} if n < 3 else set()  # noqa: E731
        assert reducts_within(0, step, 2) == {1, 2}

    def test_reducts_within_on_a_cycle(self):
        assert reducts_within(0, lambda n: {(n + 1) % 2}, 3) == {0, 1}

    def test_add_normalises(self, add_es):
        two = succ(succ(ZERO))
        found = reachable(add(succ(ZERO), succ(ZERO)), stepper(add_es, "seq"), 5)
        assert two in found
