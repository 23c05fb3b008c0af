"""Radial Landau-Coulomb solver with blow-down diagnostics and estimate checks."""

__version__ = "0.1.0"
