"""Desk-scale numerical checks for constructed QFT scattering amplitudes."""

__version__ = "0.1.0"
