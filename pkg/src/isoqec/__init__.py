"""Isotropic quantum-computing errors and what ideal syndrome correction does to them."""

__version__ = "0.1.0"
