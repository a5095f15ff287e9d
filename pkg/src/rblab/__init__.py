"""Randomized-benchmarking laboratory over the symplectic Clifford representation."""

__version__ = "0.1.0"
