"""Shared fixtures for all tests."""

import numpy as np
import pytest
import structlog

from relrewrite.core.term import ESystem, Node, Rule, Signature, Var, VarSet
from relrewrite.core.universe import Universe, universe_for
from relrewrite.data.loader import load_trs, parse_term

ZERO = Node("zero")


def succ(t):
    return Node("succ", (t,))


def add(s, t):
    return Node("add", (s, t))


@pytest.fixture(scope="session")
def add_es() -> ESystem:
    """add(zero,y) -> y, add(succ(x),y) -> succ(add(x,y))."""
    return load_trs("add").esystem


@pytest.fixture(scope="session")
def overlap_es() -> ESystem:
    """a -> b, a -> c over constants only."""
    return load_trs("overlap").esystem


@pytest.fixture(scope="session")
def nonortho_es() -> ESystem:
    """f(g(x)) -> x, g(a) -> b."""
    return load_trs("nonortho").esystem


@pytest.fixture(scope="session")
def fgc_es() -> ESystem:
    """f(c,x) -> x, g(c) -> c."""
    return load_trs("fgc").esystem


@pytest.fixture(scope="session")
def empty_es() -> ESystem:
    """The ADD signature with no rules."""
    return ESystem(
        Signature((("add", 2), ("succ", 1), ("zero", 0))), VarSet(("x", "y")), ()
    )


@pytest.fixture(scope="session")
def linear_es() -> ESystem:
    """A single unary rule, for universes small enough to search exhaustively."""
    return ESystem(
        Signature((("s", 1), ("o", 0))),
        VarSet(("x",)),
        (Rule(Node("s", (Node("s", (Var("x"),)),)), Var("x")),),
    )


@pytest.fixture(scope="session")
def add_u2(add_es) -> Universe:
    return universe_for(add_es, 2)


@pytest.fixture(scope="session")
def add_u3(add_es) -> Universe:
    return universe_for(add_es, 3)


@pytest.fixture(scope="session")
def fgc_u3(fgc_es) -> Universe:
    return universe_for(fgc_es, 3)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(42)


@pytest.fixture
def parse(add_es):
    """Parse a term over the ADD signature."""
    return lambda text: parse_term(text, add_es)


@pytest.fixture(autouse=True)
def reset_logging():
    """Drop any structlog configuration a CLI run installed."""
    yield
    structlog.reset_defaults()
