"""Tests for the TRS file loader and term parsers."""

import pytest

from relrewrite.core.lam import App, Lam, Var
from relrewrite.data.loader import (
    LambdaSyntaxError,
    TrsSemanticError,
    TrsSyntaxError,
    format_trs,
    load_trs,
    parse_lam,
    parse_term,
    parse_trs,
    parse_trs_file,
    resolve_system_path,
)
from tests.conftest import ZERO, add, succ

ADD_TEXT = """\
# addition
sig add/2
sig succ/1 zero/0   # merged with the line above
vars x y

rule add(zero, y) -> y
rule add(succ(x),y) -> succ(add(x,y))
"""


class TestParseTrs:

    def test_add_file(self, add_es):
        assert parse_trs(ADD_TEXT) == add_es

    def test_rule_lines(self):
        assert parse_trs_file(ADD_TEXT).rule_lines == (6, 7)

    def test_round_trip(self, add_es, nonortho_es, overlap_es):
        for es in (add_es, nonortho_es, overlap_es):
            assert parse_trs(format_trs(es)) == es

    def test_tab_after_directive(self, add_es):
        assert parse_trs(ADD_TEXT.replace("rule ", "rule\t").replace("sig ", "sig\t")) == add_es

    def test_tab_keeps_columns(self):
        columns = []
        for sep in (" ", "\t"):
            with pytest.raises(TrsSyntaxError) as info:
                parse_trs(f"sig a/0\nrule{sep}a -> a!\n")
            columns.append(info.value.column)
        assert columns[0] == columns[1]

    def test_format(self, overlap_es):
        assert format_trs(overlap_es) == "sig a/0 b/0 c/0\nrule a -> b\nrule a -> c\n"


class TestSyntaxErrors:

    def test_unknown_directive(self):
        with pytest.raises(TrsSyntaxError, match="^1:1: unknown directive 'sgi'"):
            parse_trs("sgi a/0\n")

    def test_bad_signature_entry(self):
        with pytest.raises(TrsSyntaxError, match="expected name/arity") as info:
            parse_trs("sig a/0 add2\n")
        assert (info.value.line, info.value.column) == (1, 9)

    def test_missing_arrow(self):
        with pytest.raises(TrsSyntaxError, match="expected '->'"):
            parse_trs("sig a/0 b/0\nrule a b\n")

    def test_malformed_term_reports_line(self):
        with pytest.raises(TrsSyntaxError) as info:
            parse_trs("sig f/2 a/0\nvars x\nrule f(x,) -> x\n")
        assert info.value.line == 3
        assert str(info.value).startswith("3:")

    def test_applied_variable(self):
        with pytest.raises(TrsSyntaxError, match="variable x cannot take arguments"):
            parse_trs("sig f/1\nvars x\nrule f(x(x)) -> x\n")

    def test_bad_character(self):
        with pytest.raises(TrsSyntaxError, match="unexpected character"):
            parse_trs("sig a/0\nrule a -> a!\n")


class TestSemanticErrors:

    def test_variable_lhs(self):
        with pytest.raises(TrsSemanticError, match="lhs is a variable") as info:
            parse_trs("sig zero/0\nvars x\nrule x -> zero\n")
        assert info.value.rule == 1
        assert str(info.value).startswith("rule 1, line 3:")

    def test_unbound_rhs_variable(self):
        with pytest.raises(TrsSemanticError, match="rhs variable not bound: y") as info:
            parse_trs("sig f/1 g/1\nvars x y\nrule f(x) -> f(x)\nrule f(x) -> g(y)\n")
        assert info.value.rule == 2

    def test_arity_mismatch(self):
        with pytest.raises(TrsSemanticError, match="arity mismatch for succ: expected 1, got 2"):
            parse_trs("sig succ/1 zero/0\nrule succ(zero,zero) -> zero\n")

    def test_undeclared_symbol(self):
        with pytest.raises(TrsSemanticError, match="undeclared symbol pred"):
            parse_trs("sig zero/0\nrule pred(zero) -> zero\n")

    def test_bad_declarations(self):
        with pytest.raises(TrsSemanticError, match="clashes"):
            parse_trs("sig zero/0\nvars zero\n")


class TestParseTerm:

    def test_term(self, add_es):
        assert parse_term("succ(add(zero, zero))", add_es) == succ(add(ZERO, ZERO))

    def test_undeclared(self, add_es):
        with pytest.raises(TrsSemanticError, match="undeclared symbol pred"):
            parse_term("pred(zero)", add_es)

    def test_trailing_input(self, add_es):
        with pytest.raises(TrsSyntaxError, match="after term"):
            parse_term("zero zero", add_es)


class TestSystems:

    def test_bundled_names(self):
        for name in ("add", "overlap", "nonortho", "fgc"):
            assert resolve_system_path(name).name == f"{name}.trs"

    def test_path(self, tmp_path, overlap_es):
        path = tmp_path / "mine.trs"
        path.write_text(format_trs(overlap_es), encoding="utf-8")
        assert load_trs(str(path)).esystem == overlap_es

    @pytest.mark.parametrize("name", ["nope", "../add", "add.trs"])
    def test_missing(self, name):
        with pytest.raises(FileNotFoundError):
            resolve_system_path(name)


class TestParseLam:

    def test_application_is_left_associative(self):
        assert parse_lam("0 1 2") == App(App(Var(0), Var(1)), Var(2))

    def test_abstraction_extends_right(self):
        assert parse_lam("\\.0 0") == Lam(App(Var(0), Var(0)))

    def test_unexpected_character(self):
        with pytest.raises(LambdaSyntaxError, match="column 3"):
            parse_lam("0 x")

    def test_unexpected_end(self):
        with pytest.raises(LambdaSyntaxError, match="unexpected end of input"):
            parse_lam("\\.")

    def test_unclosed_paren(self):
        with pytest.raises(LambdaSyntaxError, match="expected '\\)'"):
            parse_lam("(0 1")
