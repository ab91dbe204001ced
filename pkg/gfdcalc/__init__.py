"""Generalized fractional derivative (GFD) calculator."""

__version__ = "0.1.0"
