"""Parametrized loop-gas circuits for the toric code in a magnetic field."""

__version__ = "0.1.0"
