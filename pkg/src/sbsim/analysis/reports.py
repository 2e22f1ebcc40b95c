"""Console reports for the command-line tools."""

import math
from typing import Any, Optional

from rich.console import Console  # type: ignore[import-not-found]
from rich.table import Table  # type: ignore[import-not-found]

from sbsim.building.config import BuildingConfig
from sbsim.calib.evaluation import FidelityReport
from sbsim.calib.search import CalibrationResult


def kelvin_to_celsius(value: float) -> float:
    return value - 273.15


class ReportGenerator:
    """Render simulator results as rich tables."""

    def __init__(self, console: Optional[Console] = None):
        """Initialize report generator.

        Args:
            console: Rich console for output. Creates default if None.
        """
        self.console = console or Console()

    def building_report(self, config: BuildingConfig) -> None:
        """Floors, zones and devices of a validated building."""
        self.console.print(f"\n[bold cyan]Building - {config.name}[/bold cyan]\n")

        floor_table = Table(title="Floors")
        floor_table.add_column("Floor", style="cyan")
        floor_table.add_column("Size", justify="right")
        floor_table.add_column("Zones", style="green")
        for floor in config.floors:
            floor_table.add_row(
                floor.floor_id, "{} x {}".format(*floor.shape), ", ".join(sorted(floor.zones))
            )
        self.console.print(floor_table)

        device_table = Table(title="Devices")
        device_table.add_column("Device", style="cyan")
        device_table.add_column("Type", style="magenta")
        device_table.add_column("Zone", style="green")
        device_table.add_column("Diffusers", justify="right")
        for device in config.devices:
            device_table.add_row(
                device.device_id,
                device.device_type,
                device.zone_id or "-",
                str(len(device.diffusers)) if device.device_type == "vav" else "-",
            )
        self.console.print(device_table)

        params_table = Table(title="Physical Parameters", show_header=False)
        params_table.add_column(style="dim")
        params_table.add_column(style="bold", justify="right")
        for name, value in config.parameters.to_dict().items():
            params_table.add_row(name, f"{value:g}")
        self.console.print(params_table)

    def run_report(self, summary: dict[str, Any]) -> None:
        """Totals of a rollout (the ``summary.json`` mapping)."""
        self.console.print(
            f"\n[bold cyan]Rollout - {summary['steps']} steps to {summary['end']}[/bold cyan]\n"
        )
        table = Table(show_header=False, box=None, padding=(0, 2))
        table.add_column(style="dim")
        table.add_column(style="bold")
        table.add_row("Electricity:", f"{summary['electricity_kwh']:.2f} kWh")
        table.add_row("Natural Gas:", f"{summary['natural_gas_kwh']:.2f} kWh")
        table.add_row("Carbon:", f"{summary['carbon_kg']:.3f} kg CO2e")
        table.add_row("Comfort Violations:", str(summary["comfort_violations"]))
        table.add_row("Total Reward:", f"{summary['total_reward']:.3f}")
        self.console.print(table)

    def fidelity_report(self, report: FidelityReport) -> None:
        """MAE, median and per-zone errors at the scored step."""
        self.console.print(f"\n[bold cyan]Fidelity - N = {report.n}[/bold cyan]\n")
        if report.failed:
            self.console.print(f"[red]Simulation diverged:[/red] {report.failure}")
            return

        overview = Table(show_header=False, box=None, padding=(0, 2))
        overview.add_column(style="dim")
        overview.add_column(style="bold")
        overview.add_row("MAE:", f"{report.mae:.3f} K")
        overview.add_row("Median:", f"{report.median:.3f} K")
        self.console.print(overview)

        zone_table = Table(title="Zone Errors")
        zone_table.add_column("Zone", style="cyan")
        zone_table.add_column("Real (C)", justify="right")
        zone_table.add_column("Simulated (C)", justify="right")
        zone_table.add_column("Error (K)", style="magenta", justify="right")
        zone_table.add_column("Bar", style="blue")
        real = report.real[report.n - 1]
        simulated = report.simulated[-1]
        worst = max(report.zone_errors.values(), default=0.0)
        for zone, error in report.zone_errors.items():
            zone_table.add_row(
                zone,
                f"{kelvin_to_celsius(real[zone]):.2f}",
                f"{kelvin_to_celsius(simulated[zone]):.2f}",
                f"{error:.3f}",
                self._create_bar(100.0 * error / worst if worst > 0 else 0.0),
            )
        self.console.print(zone_table)

    def calibration_report(
        self, result: CalibrationResult, comparison: Optional[dict[str, Any]] = None
    ) -> None:
        """Best candidate, timing and the before/after comparison."""
        self.console.print(
            f"\n[bold cyan]Calibration - {result.strategy}, "
            f"{len(result.evaluations)} evaluations[/bold cyan]\n"
        )
        overview = Table(show_header=False, box=None, padding=(0, 2))
        overview.add_column(style="dim")
        overview.add_column(style="bold")
        overview.add_row("Best Candidate:", str(result.best_index))
        overview.add_row("Best MAE:", self._format_error(result.best_objective))
        failed = sum(1 for e in result.evaluations if e.failed)
        overview.add_row("Failed Candidates:", str(failed))
        overview.add_row("Elapsed:", f"{result.elapsed_seconds:.1f} s")
        overview.add_row("Throughput:", f"{result.evaluations_per_second:.2f} eval/s")
        overview.add_row("CPU Time:", f"{result.cpu_seconds:.1f} s")
        self.console.print(overview)

        params = Table(title="Best Parameters")
        params.add_column("Parameter", style="cyan")
        params.add_column("Value", style="green", justify="right")
        for name, value in result.best_parameters.to_dict().items():
            params.add_row(name, f"{value:.6g}")
        self.console.print(params)

        if comparison:
            table = Table(title="Before / After")
            table.add_column("Interval", style="cyan")
            table.add_column("Start")
            table.add_column("N", justify="right")
            table.add_column("Midpoint MAE", style="magenta", justify="right")
            table.add_column("Calibrated MAE", style="green", justify="right")
            for row in comparison["intervals"]:
                table.add_row(
                    row["interval"],
                    row["start"],
                    str(row["n"]),
                    self._format_error(row["midpoint_mae"]),
                    self._format_error(row["calibrated_mae"]),
                )
            self.console.print(table)

    def _format_error(self, value: float) -> str:
        return "diverged" if not math.isfinite(value) else f"{value:.3f} K"

    def _create_bar(self, percentage: float, width: int = 20) -> str:
        """Create a text-based progress bar.

        Args:
            percentage: Percentage value (0-100)
            width: Width of the bar in characters

        Returns:
            Bar string
        """
        filled = int((percentage / 100) * width)
        return "█" * filled + "░" * (width - filled)
