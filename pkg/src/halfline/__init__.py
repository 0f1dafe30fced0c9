"""Spectral and dispersive numerics for the half-line inverse-square operator."""

__version__ = "0.1.0"
