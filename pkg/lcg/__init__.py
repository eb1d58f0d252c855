"""Solver library and CLI for linearly coupled communication games."""

__version__ = "1.0.0"
