"""Main CLI application."""

import sys
from pathlib import Path
from typing import Optional

import click  # type: ignore[import-not-found]
from dateutil import parser as date_parser  # type: ignore[import-untyped]
from rich.console import Console  # type: ignore[import-not-found]

from sbsim import __version__
from sbsim.analysis.reports import ReportGenerator
from sbsim.building.assembly import assemble
from sbsim.building.config import load_building_config
from sbsim.calib.evaluation import n_step_eval
from sbsim.calib.synthetic import DiurnalAmbient, SyntheticScenario, generate_telemetry
from sbsim.calib.telemetry import load_telemetry, write_telemetry
from sbsim.cli.calibrate_commands import calibrate
from sbsim.cli.common import (
    DEFAULT_STEPS,
    error_console,
    fail,
    load_config,
    parameters_option,
    seed_option,
)
from sbsim.core.errors import SimulationError
from sbsim.core.logs import LOG_LEVELS, configure_logging
from sbsim.engine.inputs import constant_series, load_ambient, parse_policy
from sbsim.engine.simulator import Action, replay
from sbsim.export.fidelity import FidelityWriter
from sbsim.export.trajectory import TrajectoryWriter, trajectory_summary

console = Console()


@click.group()  # type: ignore[misc]
@click.version_option(version=__version__)  # type: ignore[misc]
@click.option(  # type: ignore[misc]
    "--log-level",
    type=click.Choice(LOG_LEVELS, case_sensitive=False),
    default="WARNING",
    help="Diagnostic log level (stderr)",
)
@click.option("--no-color", is_flag=True, help="Disable colored output")  # type: ignore[misc]
@click.pass_context  # type: ignore[misc]
def cli(ctx: click.Context, log_level: str, no_color: bool) -> None:
    """sbsim - calibratable building thermal simulator.

    Validate building manifests, run rollouts, evaluate N-step fidelity
    against telemetry and calibrate physical parameters.
    """
    ctx.ensure_object(dict)
    configure_logging(log_level)

    if no_color:
        console.no_color = True
        error_console.no_color = True


@cli.command()  # type: ignore[misc]
@click.argument("manifest", type=click.Path())  # type: ignore[misc]
@click.option("-q", "--quiet", is_flag=True, help="Only report errors")  # type: ignore[misc]
def validate(manifest: str, quiet: bool) -> None:
    """Validate a building manifest and every file it references.

    Example:
        sbsim validate samples/two_zone/manifest.yml
    """
    try:
        config = load_building_config(manifest)
    except SimulationError as e:
        fail(e)

    if not quiet:
        ReportGenerator(console).building_report(config)
    console.print(f"[green]✓[/green] {manifest} is valid")


@cli.command()  # type: ignore[misc]
@click.argument("manifest", type=click.Path())  # type: ignore[misc]
@click.option("-n", "--steps", default=DEFAULT_STEPS, show_default=True, help="Steps to run")  # type: ignore[misc]
@seed_option  # type: ignore[misc]
@parameters_option  # type: ignore[misc]
@click.option("--ambient", type=click.Path(), help="Ambient CSV (timestamp,temperature)")  # type: ignore[misc]
@click.option(  # type: ignore[misc]
    "--policy",
    help="'constant <water K> <air K>' or 'schedule <csv>' (manifest setpoints by default)",
)
@click.option("-o", "--out", required=True, type=click.Path(file_okay=False), help="Output directory")  # type: ignore[misc]
def run(
    manifest: str,
    steps: int,
    seed: Optional[int],
    parameters: Optional[str],
    ambient: Optional[str],
    policy: Optional[str],
    out: str,
) -> None:
    """Roll out a setpoint policy and write the trajectory.

    Writes trajectory.csv (one row per step) and summary.json.

    Example:
        sbsim run samples/two_zone/manifest.yml -n 72 --policy "constant 333.15 291.15" -o out
    """
    if steps < 1:
        raise click.BadParameter("must be at least 1", param_hint="--steps")
    try:
        config = load_config(manifest, seed, parameters)
        settings = config.simulation
        default = Action(settings.supply_water_setpoint, settings.supply_air_setpoint)
        try:
            actions = parse_policy(policy, settings.start, steps, default)
        except SimulationError:
            raise
        except ValueError as e:
            raise click.BadParameter(str(e), param_hint="--policy")
        if ambient is not None:
            outside = load_ambient(ambient)
        else:
            outside = constant_series(settings.start, steps, settings.ambient_temperature)

        simulator = assemble(config)
        initial = simulator.initial_observation(
            settings.start,
            {zone: settings.initial_zone_temperature for zone in simulator.zone_ids},
            outside.get(settings.start, settings.ambient_temperature),
        )
        state = simulator.reset(initial)
        trajectory = replay(simulator, state, actions, outside, steps)
        TrajectoryWriter(Path(out)).write(
            trajectory, simulator.observation_names, simulator.comfort
        )
    except SimulationError as e:
        fail(e)

    ReportGenerator(console).run_report(trajectory_summary(trajectory, simulator.comfort))
    console.print(f"[green]✓[/green] Wrote {steps} steps to {out}")


@cli.command(name="eval")  # type: ignore[misc]
@click.argument("manifest", type=click.Path())  # type: ignore[misc]
@click.option("-t", "--telemetry", required=True, type=click.Path(), help="Telemetry CSV")  # type: ignore[misc]
@click.option("-n", "--n", "n", default=DEFAULT_STEPS, show_default=True, help="Records to compare")  # type: ignore[misc]
@seed_option  # type: ignore[misc]
@parameters_option  # type: ignore[misc]
@click.option("-o", "--out", required=True, type=click.Path(file_okay=False), help="Output directory")  # type: ignore[misc]
def eval_command(
    manifest: str,
    telemetry: str,
    n: int,
    seed: Optional[int],
    parameters: Optional[str],
    out: str,
) -> None:
    """Evaluate N-step fidelity against telemetry.

    Resets from the first record, replays the recorded setpoints and ambient
    temperature, and scores the zone temperatures at record N-1. Writes
    report.json, zone_errors.csv, epsilon.csv, drift.csv and per-floor
    heatmaps.

    Example:
        sbsim eval samples/two_zone/manifest.yml -t telemetry.csv -n 72 -o out
    """
    if n < 1:
        raise click.BadParameter("must be at least 1", param_hint="--n")
    try:
        config = load_config(manifest, seed, parameters)
        series = load_telemetry(telemetry)
        report = n_step_eval(config, None, series, n)
        FidelityWriter(Path(out)).write(report, series.timestamps[:n])
    except SimulationError as e:
        fail(e)

    ReportGenerator(console).fidelity_report(report)
    if report.failed:
        error_console.print(f"[red]Error:[/red] simulation diverged: {report.failure}")
        sys.exit(3)
    console.print(f"[green]✓[/green] Wrote evaluation to {out}")


@cli.command()  # type: ignore[misc]
@click.argument("manifest", type=click.Path())  # type: ignore[misc]
@click.option("-n", "--records", default=DEFAULT_STEPS, show_default=True, help="Records to generate")  # type: ignore[misc]
@click.option("--start", help="First timestamp (manifest start by default)")  # type: ignore[misc]
@click.option("--initial-temperature", type=float, help="Initial zone temperature (K)")  # type: ignore[misc]
@click.option("--ambient-mean", type=float, help="Mean outside temperature (K)")  # type: ignore[misc]
@click.option("--ambient-amplitude", default=5.0, show_default=True, help="Diurnal amplitude (K)")  # type: ignore[misc]
@click.option("--peak-hour", default=15.0, show_default=True, help="Hour of peak ambient")  # type: ignore[misc]
@click.option("--policy", help="'constant <water K> <air K>' or 'schedule <csv>'")  # type: ignore[misc]
@seed_option  # type: ignore[misc]
@parameters_option  # type: ignore[misc]
@click.option("-o", "--out", required=True, type=click.Path(dir_okay=False), help="Telemetry CSV to write")  # type: ignore[misc]
def synth(
    manifest: str,
    records: int,
    start: Optional[str],
    initial_temperature: Optional[float],
    ambient_mean: Optional[float],
    ambient_amplitude: float,
    peak_hour: float,
    policy: Optional[str],
    seed: Optional[int],
    parameters: Optional[str],
    out: str,
) -> None:
    """Generate synthetic telemetry by running the simulator.

    Use --parameters to hide a known parameter vector in the data, then
    check that `sbsim calibrate` recovers it.

    Example:
        sbsim synth samples/two_zone/manifest.yml -n 144 -o telemetry.csv
    """
    if records < 1:
        raise click.BadParameter("must be at least 1", param_hint="--records")
    try:
        config = load_config(manifest, seed, parameters)
        settings = config.simulation
        first = settings.start
        if start is not None:
            try:
                first = date_parser.isoparse(start)
            except ValueError:
                raise click.BadParameter(f"{start!r} is not ISO-8601", param_hint="--start")
        default = Action(settings.supply_water_setpoint, settings.supply_air_setpoint)
        try:
            schedule = parse_policy(policy, first, records, default)
        except SimulationError:
            raise
        except ValueError as e:
            raise click.BadParameter(str(e), param_hint="--policy")
        scenario = SyntheticScenario(
            start=first,
            records=records,
            initial_zone_temperatures=(
                settings.initial_zone_temperature
                if initial_temperature is None
                else initial_temperature
            ),
            ambient=DiurnalAmbient(
                mean=settings.ambient_temperature if ambient_mean is None else ambient_mean,
                amplitude=ambient_amplitude,
                peak_hour=peak_hour,
            ),
            action=default,
            schedule=schedule,
        )
        series = generate_telemetry(config, scenario)
        write_telemetry(series, out)
    except SimulationError as e:
        fail(e)

    console.print(
        f"[green]✓[/green] Wrote {len(series)} records for {len(series.zone_ids)} zones to {out}"
    )


cli.add_command(calibrate)


if __name__ == "__main__":
    cli(obj={})
