"""Shared schemas for scenario documents and run reports."""
