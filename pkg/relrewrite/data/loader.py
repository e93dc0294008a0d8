"""TRS file loader and term parsers.

File format, one declaration per line, `#` starting a comment:

    sig add/2 succ/1 zero/0
    vars x y
    rule add(zero,y) -> y

`sig` lines may repeat and are merged. Identifiers declared in `vars` parse
as variables, every other identifier as an operation symbol. λ-terms use
`\\.` for abstraction, juxtaposition for application and integers for
de Bruijn indices.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import structlog

from relrewrite.core import lam
from relrewrite.core.term import ESystem, Node, Rule, Signature, Term, Var, VarSet
from relrewrite.core.validator import (
    IDENTIFIER,
    check_term,
    validate_declarations,
    validate_rule,
)

logger = structlog.get_logger(__name__)

SYSTEMS_DIR = Path(__file__).parent / "systems"

_TOKEN = re.compile(r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<punct>[(),])|(?P<bad>\S))")
_SIG_ENTRY = re.compile(r"(?P<name>[^/\s]+)/(?P<arity>\d+)")
_LAM_TOKEN = re.compile(r"\s*(?:(?P<index>\d+)|(?P<lam>\\\.)|(?P<punct>[()])|(?P<bad>\S))")


class TrsSyntaxError(Exception):
    """Raised for lexical or syntax errors, with line and column."""

    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class TrsSemanticError(Exception):
    """Raised for well-formed text describing an invalid E-system."""

    def __init__(self, message: str, line: int | None = None, rule: int | None = None):
        where = []
        if rule is not None:
            where.append(f"rule {rule}")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.line = line
        self.rule = rule


class LambdaSyntaxError(Exception):
    """Raised for malformed λ-term text, with column."""

    def __init__(self, message: str, column: int = 1):
        super().__init__(f"column {column}: {message}")
        self.column = column


@dataclass(frozen=True)
class TrsFile:
    """A parsed TRS file.

    Attributes:
        esystem: The validated E-system.
        rule_lines: Source line of each rule, in rule order.
    """
    esystem: ESystem
    rule_lines: tuple[int, ...] = ()


class _TermParser:
    """Recursive descent over `ident | ident(term, ...)`."""

    def __init__(self, text: str, varset: VarSet, line: int = 1, offset: int = 0):
        self.tokens: list[tuple[str, str, int]] = []
        self.line = line
        pos = 0
        while pos < len(text):
            match = _TOKEN.match(text, pos)
            if match is None or match.end() == pos:
                break
            kind = match.lastgroup
            column = offset + match.start(kind) + 1
            if kind == "bad":
                raise TrsSyntaxError(f"unexpected character {match.group(kind)!r}", line, column)
            self.tokens.append((kind, match.group(kind), column))
            pos = match.end()
        self.end_column = offset + len(text) + 1
        self.varset = varset
        self.pos = 0

    def _peek(self) -> tuple[str, str, int] | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _expect(self, value: str) -> None:
        token = self._peek()
        if token is None or token[1] != value:
            found = "end of input" if token is None else repr(token[1])
            column = self.end_column if token is None else token[2]
            raise TrsSyntaxError(f"expected {value!r}, found {found}", self.line, column)
        self.pos += 1

    def parse(self) -> Term:
        term = self._term()
        token = self._peek()
        if token is not None:
            raise TrsSyntaxError(f"unexpected {token[1]!r} after term", self.line, token[2])
        return term

    def _term(self) -> Term:
        token = self._peek()
        if token is None or token[0] != "ident":
            found = "end of input" if token is None else repr(token[1])
            column = self.end_column if token is None else token[2]
            raise TrsSyntaxError(f"expected identifier, found {found}", self.line, column)
        self.pos += 1
        name = token[1]
        nxt = self._peek()
        if nxt is None or nxt[1] != "(":
            return Var(name) if name in self.varset else Node(name)
        if name in self.varset:
            raise TrsSyntaxError(f"variable {name} cannot take arguments", self.line, token[2])
        self.pos += 1
        children = [self._term()]
        while (nxt := self._peek()) is not None and nxt[1] == ",":
            self.pos += 1
            children.append(self._term())
        self._expect(")")
        return Node(name, tuple(children))


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0]


def parse_trs_file(text: str) -> TrsFile:
    """Parse TRS text, keeping rule source lines for diagnostics.

    Raises:
        TrsSyntaxError: For unknown directives, malformed declarations or terms.
        TrsSemanticError: For invalid declarations or rules.
    """
    entries: list[tuple[str, int]] = []
    names: list[str] = []
    raw_rules: list[tuple[int, int, str]] = []

    for number, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        stripped = line.strip()
        if not stripped:
            continue
        keyword, *tail = stripped.split(None, 1)
        rest = tail[0] if tail else ""
        after = line.index(keyword) + len(keyword)
        offset = after + len(line[after:]) - len(line[after:].lstrip())
        match keyword:
            case "sig":
                for item in rest.split():
                    entry = _SIG_ENTRY.fullmatch(item)
                    if entry is None:
                        column = line.index(item) + 1
                        raise TrsSyntaxError(f"expected name/arity, found {item!r}", number,
                                             column)
                    entries.append((entry["name"], int(entry["arity"])))
            case "vars":
                names.extend(rest.split())
            case "rule":
                raw_rules.append((number, offset, rest))
            case _:
                raise TrsSyntaxError(f"unknown directive {keyword!r}", number,
                                     line.index(keyword) + 1)

    sig = Signature(tuple(entries))
    varset = VarSet(tuple(names))
    _check_declarations(sig, varset)

    rules: list[Rule] = []
    for index, (number, offset, body) in enumerate(raw_rules, start=1):
        lhs_text, arrow, rhs_text = body.partition("->")
        if not arrow:
            raise TrsSyntaxError("expected '->' in rule", number, offset + len(body) + 1)
        lhs = _TermParser(lhs_text, varset, number, offset).parse()
        rhs = _TermParser(rhs_text, varset, number, offset + len(lhs_text) + 2).parse()
        rule = Rule(lhs, rhs)
        violations = validate_rule(rule, sig, varset)
        if violations:
            raise TrsSemanticError("; ".join(violations), line=number, rule=index)
        rules.append(rule)

    es = ESystem(sig, varset, tuple(rules))
    logger.debug("loader.parsed", symbols=len(sig.entries), vars=len(names), rules=len(rules))
    return TrsFile(es, tuple(number for number, _, _ in raw_rules))


def _check_declarations(sig: Signature, varset: VarSet) -> None:
    violations = validate_declarations(sig, varset)
    if violations:
        raise TrsSemanticError("; ".join(violations))


def parse_trs(text: str) -> ESystem:
    """Parse TRS text into a validated E-system."""
    return parse_trs_file(text).esystem


def format_trs(es: ESystem) -> str:
    """Render an E-system in the file format; parse_trs reads it back unchanged."""
    lines = []
    if es.sig.entries:
        lines.append("sig " + " ".join(f"{s}/{n}" for s, n in es.sig.entries))
    if es.vars.names:
        lines.append("vars " + " ".join(es.vars.names))
    lines.extend(f"rule {rule}" for rule in es.rules)
    return "\n".join(lines) + "\n"


def parse_term(text: str, es: ESystem) -> Term:
    """Parse a term over an E-system's signature and variables.

    Raises:
        TrsSyntaxError: For malformed text.
        TrsSemanticError: For undeclared symbols or arity mismatches.
    """
    term = _TermParser(text, es.vars).parse()
    violations = check_term(term, es.sig, es.vars)
    if violations:
        raise TrsSemanticError("; ".join(violations))
    return term


def resolve_system_path(name: str) -> Path:
    """A path as given, or a bundled system name such as "add"."""
    path = Path(name)
    if path.exists():
        return path
    bundled = SYSTEMS_DIR / f"{name}.trs"
    if IDENTIFIER.fullmatch(name) and bundled.exists():
        return bundled
    raise FileNotFoundError(f"no TRS file or bundled system named {name!r}")


def load_trs(name: str) -> TrsFile:
    """Read and parse a TRS file or a bundled system.

    Raises:
        FileNotFoundError: If neither a file nor a bundled system matches.
    """
    path = resolve_system_path(name)
    logger.info("loader.loading", path=str(path))
    return parse_trs_file(path.read_text(encoding="utf-8"))


class _LamParser:
    def __init__(self, text: str):
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            match = _LAM_TOKEN.match(text, pos)
            if match is None or match.end() == pos:
                break
            kind = match.lastgroup
            if kind == "bad":
                raise LambdaSyntaxError(f"unexpected character {match.group(kind)!r}",
                                        match.start(kind) + 1)
            self.tokens.append((kind, match.group(kind), match.start(kind) + 1))
            pos = match.end()
        self.end_column = len(text) + 1
        self.pos = 0

    def _peek(self) -> tuple[str, str, int] | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def parse(self) -> lam.LamTerm:
        term = self._application()
        token = self._peek()
        if token is not None:
            raise LambdaSyntaxError(f"unexpected {token[1]!r}", token[2])
        return term

    def _application(self) -> lam.LamTerm:
        term = self._atom()
        while (token := self._peek()) is not None and token[1] != ")":
            term = lam.App(term, self._atom())
        return term

    def _atom(self) -> lam.LamTerm:
        token = self._peek()
        if token is None:
            raise LambdaSyntaxError("unexpected end of input", self.end_column)
        self.pos += 1
        kind, value, column = token
        if kind == "index":
            return lam.Var(int(value))
        if kind == "lam":
            return lam.Lam(self._application())
        if value == "(":
            inner = self._application()
            closing = self._peek()
            if closing is None or closing[1] != ")":
                column = self.end_column if closing is None else closing[2]
                raise LambdaSyntaxError("expected ')'", column)
            self.pos += 1
            return inner
        raise LambdaSyntaxError(f"unexpected {value!r}", column)


def parse_lam(text: str) -> lam.LamTerm:
    """Parse a de Bruijn λ-term such as `(\\.(\\.0) 0) ((\\.0) 1)`."""
    return _LamParser(text).parse()
