"""Entry point for python -m sbsim."""

from sbsim.cli.main import cli

if __name__ == "__main__":
    cli(obj={})
