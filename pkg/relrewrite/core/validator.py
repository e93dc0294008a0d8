"""Well-formedness validation for signatures, terms and E-systems.

Collects every violation instead of stopping at the first one, so file
loaders can report all problems of a rule at once.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from relrewrite.core.term import Node, Rule, Signature, Term, Var, VarSet, variables

if TYPE_CHECKING:
    from relrewrite.core.term import ESystem

IDENTIFIER = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


@dataclass
class ValidationResult:
    """Result of E-system validation.

    Attributes:
        is_valid: Whether every invariant holds.
        violations: Human-readable violation descriptions.
    """
    is_valid: bool
    violations: list[str] = field(default_factory=list)


def validate_esystem(es: ESystem) -> ValidationResult:
    """Check signature, variable set and every rule of an E-system.

    Args:
        es: The E-system to validate.

    Returns:
        ValidationResult listing all violations.
    """
    violations = validate_declarations(es.sig, es.vars)
    for index, rule in enumerate(es.rules, start=1):
        violations.extend(f"rule {index}: {v}" for v in validate_rule(rule, es.sig, es.vars))
    return ValidationResult(is_valid=not violations, violations=violations)


def validate_declarations(sig: Signature, varset: VarSet) -> list[str]:
    """Violations of the signature and variable set alone."""
    violations: list[str] = []
    _check_signature(sig, violations)
    _check_varset(varset, sig, violations)
    return violations


def validate_rule(rule: Rule, sig: Signature, varset: VarSet) -> list[str]:
    """Violations of a single rule: ill-formed sides, variable lhs, unbound rhs variables."""
    violations = check_term(rule.lhs, sig, varset) + check_term(rule.rhs, sig, varset)
    if isinstance(rule.lhs, Var):
        violations.append("lhs is a variable")
    bound = set(variables(rule.lhs))
    unbound = [name for name in variables(rule.rhs) if name not in bound]
    if unbound:
        violations.append(f"rhs variable not bound: {', '.join(unbound)}")
    return violations


def check_term(t: Term, sig: Signature, varset: VarSet) -> list[str]:
    """Violations of term well-formedness over (sig, varset)."""
    violations: list[str] = []
    stack = [t]
    while stack:
        current = stack.pop()
        match current:
            case Var(name):
                if name not in varset:
                    violations.append(f"undeclared variable {name}")
            case Node(symbol, children):
                arity = sig.arity(symbol)
                if arity is None:
                    violations.append(f"undeclared symbol {symbol}")
                elif arity != len(children):
                    violations.append(
                        f"arity mismatch for {symbol}: expected {arity}, got {len(children)}"
                    )
                stack.extend(children)
    return violations


def _check_signature(sig: Signature, violations: list[str]) -> None:
    """Symbols must be distinct identifiers with non-negative arities."""
    seen: set[str] = set()
    for symbol, arity in sig.entries:
        if not IDENTIFIER.fullmatch(symbol):
            violations.append(f"invalid symbol name {symbol!r}")
        if symbol in seen:
            violations.append(f"duplicate symbol {symbol}")
        seen.add(symbol)
        if arity < 0:
            violations.append(f"negative arity for {symbol}")


def _check_varset(varset: VarSet, sig: Signature, violations: list[str]) -> None:
    """Variables must be distinct identifiers, disjoint from the symbols."""
    seen: set[str] = set()
    for name in varset.names:
        if not IDENTIFIER.fullmatch(name):
            violations.append(f"invalid variable name {name!r}")
        if name in seen:
            violations.append(f"duplicate variable {name}")
        seen.add(name)
        if name in sig:
            violations.append(f"variable {name} clashes with a symbol")
