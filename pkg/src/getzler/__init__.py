"""Getzler rescaling computations with exact Clifford and jet arithmetic."""

__version__ = "0.1.0"
