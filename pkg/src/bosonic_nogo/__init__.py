"""Numerical checks of classicalization and trace-distance no-go bounds for bosonic states."""

__version__ = "0.1.0"
