"""Subcommand modules of the lcg CLI."""
