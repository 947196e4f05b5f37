"""Simulator for a trapped-ion / charge-qubit hybrid processor."""

__version__ = "0.1.0"
