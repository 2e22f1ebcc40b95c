"""CLI command for parameter calibration."""

from pathlib import Path
from typing import Optional

import click  # type: ignore[import-not-found]
import psutil  # type: ignore[import-untyped]
from rich.console import Console  # type: ignore[import-not-found]
from rich.progress import (  # type: ignore[import-not-found]
    BarColumn,
    MofNCompleteColumn,
    Progress,
    TextColumn,
)

from sbsim.analysis.reports import ReportGenerator
from sbsim.calib.search import CandidateEvaluation, compare_parameters, load_calibration_spec
from sbsim.calib.search import calibrate as run_calibration
from sbsim.calib.telemetry import load_telemetry
from sbsim.cli.common import fail, load_config, parameters_option, seed_option
from sbsim.core.errors import DegenerateCalibration, SimulationError
from sbsim.export.calibration import CalibrationWriter

console = Console()


def default_jobs() -> int:
    """Physical core count, falling back to logical cores."""
    return psutil.cpu_count(logical=False) or psutil.cpu_count() or 1


@click.command()  # type: ignore[misc]
@click.argument("manifest", type=click.Path())  # type: ignore[misc]
@click.option("-t", "--telemetry", required=True, type=click.Path(), help="Telemetry CSV")  # type: ignore[misc]
@click.option("-s", "--spec", "spec_path", required=True, type=click.Path(), help="Calibration spec file")  # type: ignore[misc]
@click.option("-j", "--jobs", type=int, help="Parallel evaluations (physical cores by default)")  # type: ignore[misc]
@seed_option  # type: ignore[misc]
@parameters_option  # type: ignore[misc]
@click.option("-o", "--out", required=True, type=click.Path(file_okay=False), help="Output directory")  # type: ignore[misc]
@click.option("--no-progress", is_flag=True, help="Hide the progress bar")  # type: ignore[misc]
def calibrate(
    manifest: str,
    telemetry: str,
    spec_path: str,
    jobs: Optional[int],
    seed: Optional[int],
    parameters: Optional[str],
    out: str,
    no_progress: bool,
) -> None:
    """Search physical parameters that minimise N-step MAE.

    Writes best_parameters.yml (a manifest patch), calibration_log.csv (one
    row per candidate) and comparison.json (box midpoint vs calibrated on
    the tuning and validation intervals). Exits 4 if every candidate failed.

    Example:
        sbsim calibrate samples/two_zone/manifest.yml -t telemetry.csv \\
            -s samples/two_zone/calibration.txt -j 8 -o out
    """
    workers = default_jobs() if jobs is None else jobs
    if workers < 1:
        raise click.BadParameter("must be at least 1", param_hint="--jobs")

    try:
        config = load_config(manifest, seed, parameters)
        series = load_telemetry(telemetry)
        spec = load_calibration_spec(spec_path)

        with Progress(
            TextColumn("[cyan]Calibrating"),
            BarColumn(),
            MofNCompleteColumn(),
            TextColumn("best {task.fields[best]}"),
            console=console,
            disable=no_progress,
            transient=True,
        ) as progress:
            task = progress.add_task("calibrate", total=spec.budget, best="-")
            best = [float("inf")]

            def advance(evaluation: CandidateEvaluation) -> None:
                best[0] = min(best[0], evaluation.objective)
                shown = f"{best[0]:.3f} K" if best[0] != float("inf") else "-"
                progress.update(task, advance=1, best=shown)

            result = run_calibration(config, spec, series, jobs=workers, progress=advance)

        writer = CalibrationWriter(Path(out))
        if result.degenerate:
            writer.write(result)
            raise DegenerateCalibration(
                f"All {len(result.evaluations)} candidates failed; see calibration_log.csv"
            )
        comparison = compare_parameters(config, spec, series, result.best_parameters)
        writer.write(result, comparison)
    except SimulationError as e:
        fail(e)

    ReportGenerator(console).calibration_report(result, comparison)
    console.print(f"[green]✓[/green] Wrote calibration to {out}")
