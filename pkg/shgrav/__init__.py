"""Variable-density spherical-harmonics gravity fields for small bodies."""

__version__ = "1.0.0"
