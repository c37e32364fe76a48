"""Numerical laboratory for divergence-free positive symmetric tensors."""

__version__ = "0.1.0"
