"""Per-cell difference heatmaps (simulated minus measured).

Measured data is per zone, so each zone's reading is broadcast over the
zone's air cells. Values are rounded to 0.001 K; the CSV holds the rounded
value and the pixel colour is computed from that same value:

* clipped to [-2, +2] K
* blue (sim colder) -> white (zero) -> red (sim warmer), linear in each half
* cells outside any zone (walls and outside air) are grey, empty in the CSV
"""

from collections.abc import Mapping
from pathlib import Path
from typing import Optional

from sbsim.export.base import ArtifactWriter, write_text_atomic
from sbsim.physics.grid import ThermalGrid

CLIP_K = 2.0
PRECISION = 3
GREY = (128, 128, 128)

Pixel = tuple[int, int, int]


def difference_grid(
    grid: ThermalGrid, real: Mapping[str, float]
) -> list[list[Optional[float]]]:
    """Rounded ``sim - real`` per cell; None outside zones."""
    zone_map = grid.zone_map
    air = grid.air_mask
    temperature = grid.temperature
    values: list[list[Optional[float]]] = []
    for r in range(grid.rows):
        row: list[Optional[float]] = []
        for c in range(grid.cols):
            zone = str(zone_map[r, c])
            if not (air[r, c] and zone):
                row.append(None)
                continue
            diff = round(float(temperature[r, c]) - real[zone], PRECISION)
            row.append(diff if diff != 0 else 0.0)
        values.append(row)
    return values


def color(value: Optional[float]) -> Pixel:
    """Colour of one rounded difference."""
    if value is None:
        return GREY
    fraction = max(-CLIP_K, min(CLIP_K, value)) / CLIP_K
    fade = int(round(255 * (1.0 - abs(fraction))))
    if fraction < 0:
        return (fade, fade, 255)
    return (255, fade, fade)


def format_value(value: Optional[float]) -> str:
    return "" if value is None else f"{value:.{PRECISION}f}"


def render_csv(values: list[list[Optional[float]]]) -> str:
    return "".join(",".join(format_value(v) for v in row) + "\n" for row in values)


def render_ppm(values: list[list[Optional[float]]]) -> str:
    """Plain (P3) pixmap, one image row per grid row."""
    rows = len(values)
    cols = len(values[0]) if values else 0
    lines = ["P3", f"{cols} {rows}", "255"]
    for row in values:
        lines.append(" ".join(" ".join(str(channel) for channel in color(v)) for v in row))
    return "\n".join(lines) + "\n"


class HeatmapWriter(ArtifactWriter):
    """Write ``heatmap_<floor>.ppm`` and ``heatmap_<floor>.csv`` per floor."""

    def write(  # type: ignore[override]
        self, grids: Mapping[str, ThermalGrid], real: Mapping[str, float]
    ) -> list[Path]:
        """Render every floor.

        Args:
            grids: Floor id -> simulated grid at the scored step
            real: Measured zone temperatures at the same step (K)

        Returns:
            Paths of the files written
        """
        self.ensure_output_dir()
        written = []
        for floor_id, grid in grids.items():
            values = difference_grid(grid, real)
            csv_path = self.path(f"heatmap_{floor_id}.csv")
            ppm_path = self.path(f"heatmap_{floor_id}.ppm")
            write_text_atomic(csv_path, render_csv(values))
            write_text_atomic(ppm_path, render_ppm(values))
            written.extend([ppm_path, csv_path])
        return written
