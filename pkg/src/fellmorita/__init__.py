"""Concrete matrix toolkit for C*-algebraic bundles and Morita equivalence of inclusions."""

__version__ = "0.1.0"
