"""Sailboat listing price models and regional analyses."""

__version__ = "0.1.0"
