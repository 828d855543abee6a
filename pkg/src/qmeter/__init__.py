"""Programmable quantum multimeters: construction, optimization and verification."""

__version__ = "0.1.0"
