"""Pontryagin extremals for a car-like robot pulling one trailer."""

__version__ = "0.1.0"
