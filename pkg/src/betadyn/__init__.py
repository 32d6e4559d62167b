"""Diophantine approximation under beta-transformations."""

__version__ = "0.1.0"
