"""relrewrite: an extensional calculus of relations for term rewriting."""

__version__ = "0.1.0"
