"""Command-line interface for sbsim."""

from sbsim.cli.main import cli

__all__ = ["cli"]
