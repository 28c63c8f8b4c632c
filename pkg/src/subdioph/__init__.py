"""Diophantine approximation of linear subspaces: exact heights and angles,
prescribed-exponent constructions, closed-form exponent formulas, rank
certificates for exponent families, and a brute-force validation search."""

__version__ = "0.1.0"
