"""Landau-level sector numerics: splitting evidence and pinning."""

__version__ = "0.1.0"
