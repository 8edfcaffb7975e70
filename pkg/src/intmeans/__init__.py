"""Certified upper bounds for the universal integral means spectrum."""

__version__ = "0.1.0"
