"""Exact desk-scale verification toolkit for two-point logarithmic Chowla machinery."""

__version__ = "0.1.0"
