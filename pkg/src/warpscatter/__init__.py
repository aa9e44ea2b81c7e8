"""Numerical scattering on two-ended warped products."""

__version__ = "0.1.0"
