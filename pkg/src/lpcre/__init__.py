"""Conformal relative equilibria on Lie-Poisson duals of small Lie algebras."""

__version__ = "0.1.0"
