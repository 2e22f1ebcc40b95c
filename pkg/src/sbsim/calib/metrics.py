"""Spatial fidelity metrics between measured and simulated zone temperatures."""

from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from sbsim.core.errors import ZoneSetMismatch
from sbsim.physics.grid import ThermalGrid


@dataclass(frozen=True)
class SpatialError:
    """Error statistics over the zones at one instant (K)."""

    mae: float
    median: float
    zone_errors: dict[str, float]


def zone_mean_temp(grid: ThermalGrid, zone: str) -> float:
    """Mean air temperature of a zone's control volumes (K).

    Raises:
        UnknownZone: If the zone is not on the grid
    """
    return grid.zone_mean(zone)


def grid_zone_temperatures(grids: Mapping[str, ThermalGrid]) -> dict[str, float]:
    """Zone id -> mean temperature across all floors."""
    temperatures = {}
    for grid in grids.values():
        for zone in grid.zone_ids:
            temperatures[zone] = zone_mean_temp(grid, zone)
    return temperatures


def absolute_errors(real: Mapping[str, float], sim: Mapping[str, float]) -> dict[str, float]:
    """Per-zone absolute error, in sorted zone order.

    Raises:
        ZoneSetMismatch: If the two mappings cover different zones
    """
    if set(real) != set(sim):
        only_real = sorted(set(real) - set(sim))
        only_sim = sorted(set(sim) - set(real))
        raise ZoneSetMismatch(
            f"Zone sets differ (measured only: {only_real}, simulated only: {only_sim})"
        )
    if not real:
        raise ZoneSetMismatch("No zones to compare")
    return {zone: abs(real[zone] - sim[zone]) for zone in sorted(real)}


def spatial_error(
    real: Mapping[str, float], sim: Union[Mapping[str, float], Mapping[str, ThermalGrid]]
) -> SpatialError:
    """Mean and median absolute zone temperature error.

    ``sim`` is either zone -> temperature or floor -> grid; grids are reduced
    to zone means first.

    Args:
        real: Measured zone temperatures (K)
        sim: Simulated zone temperatures or grids

    Returns:
        SpatialError; the MAE is the correctly rounded mean of the per-zone
        errors and the median of an even count is the mean of the middle pair

    Raises:
        ZoneSetMismatch: If the zone sets differ
    """
    values = list(sim.values())
    if values and isinstance(values[0], ThermalGrid):
        sim_temperatures = grid_zone_temperatures(sim)  # type: ignore[arg-type]
    else:
        sim_temperatures = dict(sim)  # type: ignore[arg-type]
    errors = absolute_errors(real, sim_temperatures)
    magnitudes = list(errors.values())
    return SpatialError(
        mae=float(sum(map(Fraction, magnitudes), Fraction(0)) / len(magnitudes)),
        median=float(np.median(np.array(magnitudes, dtype=np.float64))),
        zone_errors=errors,
    )

