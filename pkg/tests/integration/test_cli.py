"""End-to-end tests of the command-line entry point."""

import io
import json
import sys

import pytest
import structlog

from relrewrite.api import commands
from relrewrite.main import build_parser, configure_logging, run


def _json(capsys) -> dict:
    return json.loads(capsys.readouterr().out)


class TestParser:

    def test_defaults(self):
        args = build_parser().parse_args(["check", "laws"])
        assert (args.file, args.depth, args.trials, args.seed) == ("add", 3, 100, 0)

    def test_reduce_mode_choices(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["reduce", "--term", "zero", "--mode", "lazy"])


class TestReduce:

    def test_lists_reducts(self, capsys):
        assert run(["reduce", "--term", "succ(add(zero,zero))", "--mode", "parallel"]) == 0
        out = capsys.readouterr().out
        assert "succ(zero)" in out.splitlines()

    def test_ground_mode_finds_nothing_under_context(self, capsys):
        assert run(["reduce", "--term", "succ(add(zero,zero))", "--mode", "ground",
                    "--json"]) == 0
        assert _json(capsys)["results"] == []

    def test_steps(self, capsys):
        assert run(["reduce", "--term", "add(succ(zero),zero)", "--mode", "seq",
                    "--steps", "3", "--json"]) == 0
        assert "succ(zero)" in _json(capsys)["results"]

    def test_json_document(self, capsys):
        run(["reduce", "--term", "add(zero,zero)", "--mode", "full", "--json"])
        document = _json(capsys)
        assert document["command"] == "reduce"
        assert document["inputs"] == {
            "file": "add", "term": "add(zero,zero)", "mode": "full", "steps": 1,
        }
        assert document["results"] == ["add(zero,zero)", "zero"]
        assert document["timing"] is None

    def test_timing_flag(self, capsys):
        run(["reduce", "--term", "zero", "--json", "--timing"])
        assert _json(capsys)["timing"]["elapsed_ms"] >= 0


class TestExitCodes:

    def test_critical_pairs_found(self, capsys):
        assert run(["critical-pairs", "--file", "nonortho"]) == 1
        assert "a <- f(g(a)) -> f(b) (rules 1/2 at 0)" in capsys.readouterr().out

    def test_no_critical_pairs(self):
        assert run(["critical-pairs"]) == 0

    def test_orthogonal_overlap_fails(self, capsys):
        assert run(["orthogonal", "--file", "overlap", "--depth", "1", "--json"]) == 1
        verdicts = _json(capsys)["verdicts"]
        assert verdicts[0]["name"] == "orthogonality-unique-root"
        assert verdicts[0]["witness"] == "(b, c)"

    def test_kleisli_on_overlap(self):
        assert run(["check", "confluence", "--file", "overlap", "--depth", "1",
                    "--technique", "kleisli"]) == 1

    def test_tml_on_add(self):
        assert run(["check", "confluence", "--technique", "tml", "--depth", "3"]) == 0

    def test_law_suite(self, capsys):
        assert run(["check", "laws", "--trials", "3", "--json"]) == 0
        verdicts = _json(capsys)["verdicts"]
        assert all("anchor" in v and "pass" in v for v in verdicts)

    def test_byte_stable_json(self, capsys):
        argv = ["check", "laws", "--file", "fgc", "--trials", "2", "--seed", "4", "--json"]
        run(argv)
        first = capsys.readouterr().out
        run(argv)
        assert capsys.readouterr().out == first


class TestInputErrors:

    def test_malformed_term(self, capsys):
        assert run(["reduce", "--term", "succ("]) == 2
        assert "error: 1:" in capsys.readouterr().err

    def test_undeclared_symbol(self, capsys):
        assert run(["reduce", "--term", "pred(zero)"]) == 2
        assert "undeclared symbol pred" in capsys.readouterr().err

    def test_missing_file(self, capsys):
        assert run(["critical-pairs", "--file", "missing"]) == 2
        assert "no TRS file" in capsys.readouterr().err

    def test_invalid_rule_file(self, tmp_path, capsys):
        path = tmp_path / "bad.trs"
        path.write_text("sig zero/0\nvars x\nrule x -> zero\n", encoding="utf-8")
        assert run(["critical-pairs", "--file", str(path)]) == 2
        assert "lhs is a variable" in capsys.readouterr().err

    def test_usage_error(self):
        assert run(["reduce"]) == 2
        assert run(["orthogonal", "--depth", "0"]) == 2

    def test_rules_deeper_than_universe(self, capsys):
        assert run(["orthogonal", "--depth", "2"]) == 2
        assert "does not fit" in capsys.readouterr().err

    def test_universe_cap(self, monkeypatch, capsys):
        monkeypatch.setenv("RELWRITE_UNIVERSE_CAP", "10")
        assert run(["orthogonal", "--depth", "3"]) == 2
        assert "error: " in capsys.readouterr().err


class TestLambda:

    def test_full_mode_passes(self):
        assert run(["lambda", "confluence", "--mode", "full", "--size", "5", "--scope", "1"]) == 0

    @pytest.mark.slow
    def test_parallel_counterexample(self, capsys):
        assert run(["lambda", "confluence", "--size", "10", "--scope", "1", "--json"]) == 1
        verdict = _json(capsys)["verdicts"][0]
        assert verdict["name"] == "lambda-diamond-parallel"
        assert verdict["pass"] is False
        assert verdict["witness"].startswith("(")


class TestCommandErrors:

    def test_steps_below_one(self):
        with pytest.raises(commands.CommandInputError, match="--steps"):
            commands.reduce_command("add", "zero", "parallel", steps=0)

    def test_unknown_lambda_mode(self):
        with pytest.raises(commands.CommandInputError, match="unknown lambda mode"):
            commands.lambda_confluence_command(3, mode="lazy")

    def test_internal_value_error_is_not_an_input_error(self, monkeypatch):
        def broken(file):
            raise ValueError("internal")

        monkeypatch.setattr(commands, "critical_pairs_command", broken)
        with pytest.raises(ValueError, match="internal"):
            run(["critical-pairs"])


class TestLogging:

    def test_follows_current_stderr(self, monkeypatch):
        configure_logging("warning")
        stream = io.StringIO()
        monkeypatch.setattr(sys, "stderr", stream)
        structlog.get_logger("relrewrite.test").warning("cli.redirected")
        assert "cli.redirected" in stream.getvalue()

    def test_survives_closed_capture_stream(self, monkeypatch):
        closed = io.StringIO()
        monkeypatch.setattr(sys, "stderr", closed)
        configure_logging("warning")
        closed.close()
        monkeypatch.setattr(sys, "stderr", io.StringIO())
        structlog.get_logger("relrewrite.test").warning("cli.after_close")
        assert "cli.after_close" in sys.stderr.getvalue()
