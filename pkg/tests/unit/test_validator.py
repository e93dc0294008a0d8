"""Tests for E-system validation."""

from relrewrite.core.term import Node, Rule, Signature, Var, VarSet
from relrewrite.core.validator import (
    ValidationResult,
    check_term,
    validate_declarations,
    validate_esystem,
    validate_rule,
)

SIG = Signature((("add", 2), ("succ", 1), ("zero", 0)))
VARS = VarSet(("x", "y"))


class TestDeclarations:

    def test_valid(self):
        assert validate_declarations(SIG, VARS) == []

    def test_duplicate_symbol(self):
        sig = Signature((("f", 1), ("f", 2)))
        assert any("duplicate symbol f" in v for v in validate_declarations(sig, VarSet()))

    def test_negative_arity(self):
        sig = Signature((("f", -1),))
        assert any("negative arity" in v for v in validate_declarations(sig, VarSet()))

    def test_variable_clashes_with_symbol(self):
        violations = validate_declarations(SIG, VarSet(("zero",)))
        assert any("clashes" in v for v in violations)

    def test_invalid_identifier(self):
        violations = validate_declarations(Signature((("1f", 0),)), VarSet())
        assert any("invalid symbol name" in v for v in violations)

    def test_duplicate_variable(self):
        violations = validate_declarations(SIG, VarSet(("x", "x")))
        assert any("duplicate variable x" in v for v in violations)


class TestTerms:

    def test_well_formed(self):
        assert check_term(Node("add", (Node("zero"), Var("x"))), SIG, VARS) == []

    def test_arity_mismatch(self):
        violations = check_term(Node("succ", (Node("zero"), Node("zero"))), SIG, VARS)
        assert violations == ["arity mismatch for succ: expected 1, got 2"]

    def test_undeclared_symbol(self):
        assert check_term(Node("pred", (Var("x"),)), SIG, VARS) == ["undeclared symbol pred"]

    def test_undeclared_variable(self):
        assert check_term(Var("z"), SIG, VARS) == ["undeclared variable z"]


class TestRules:

    def test_lhs_variable(self):
        assert "lhs is a variable" in validate_rule(Rule(Var("x"), Node("zero")), SIG, VARS)

    def test_rhs_variable_not_bound(self):
        rule = Rule(Node("succ", (Var("x"),)), Var("y"))
        assert validate_rule(rule, SIG, VARS) == ["rhs variable not bound: y"]

    def test_collects_every_violation(self):
        rule = Rule(Var("x"), Node("pred", (Var("y"),)))
        violations = validate_rule(rule, SIG, VARS)
        assert len(violations) == 3


class TestValidateESystem:

    def test_result_type(self, add_es):
        result = validate_esystem(add_es)
        assert isinstance(result, ValidationResult)
        assert result.is_valid
        assert result.violations == []

    def test_violations_prefixed_with_rule_index(self, add_es):
        # ESystem validates on construction, so feed a bypassing instance.
        broken = object.__new__(type(add_es))
        object.__setattr__(broken, "sig", SIG)
        object.__setattr__(broken, "vars", VARS)
        object.__setattr__(broken, "rules", (Rule(Var("x"), Node("zero")),))
        result = validate_esystem(broken)
        assert not result.is_valid
        assert result.violations == ["rule 1: lhs is a variable"]
