"""Helpers shared by the CLI command modules."""

import sys
from typing import Any, NoReturn, Optional

import click  # type: ignore[import-not-found]
from rich.console import Console  # type: ignore[import-not-found]

from sbsim.building.config import BuildingConfig, load_building_config
from sbsim.core.config import load_manifest_patch
from sbsim.core.errors import ManifestInvalid, SimulationError

error_console = Console(stderr=True)

DEFAULT_STEPS = 72


def fail(error: SimulationError) -> NoReturn:
    """Print a domain error and exit with its code (2 config, 3 runtime, 4 degenerate)."""
    error_console.print(f"[red]Error:[/red] {error}", highlight=False)
    sys.exit(error.exit_code)


def load_config(
    manifest: str, seed: Optional[int] = None, parameters: Optional[str] = None
) -> BuildingConfig:
    """Load a manifest, then apply a seed override and a parameter patch."""
    config = load_building_config(manifest)
    if seed is not None:
        config = config.with_seed(seed)
    if parameters is not None:
        patch: dict[str, Any] = load_manifest_patch(parameters)
        values = patch.get("parameters", patch)
        if not isinstance(values, dict):
            raise ManifestInvalid("'parameters' must be a mapping", parameters)
        config = config.with_parameters(config.parameters.updated(values))
    return config


seed_option = click.option(
    "--seed",
    type=int,
    envvar="SBSIM_SEED",
    help="Shuffle seed (overrides the manifest; env SBSIM_SEED)",
)

parameters_option = click.option(
    "--parameters",
    type=click.Path(exists=True, dir_okay=False),
    help="YAML manifest patch with physical parameters (e.g. best_parameters.yml)",
)
