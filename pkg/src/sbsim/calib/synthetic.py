"""Synthetic telemetry produced by the simulator itself.

Used as a stand-in for real building data: telemetry generated under known
parameters gives calibration a ground truth to recover.
"""

import logging
import math
from collections.abc import Mapping
from dataclasses import dataclass
from datetime import datetime
from typing import Optional, Union

from sbsim.building.assembly import assemble
from sbsim.building.config import BuildingConfig, PhysicalParameters
from sbsim.calib.telemetry import TelemetryRecord, TelemetrySeries
from sbsim.core.errors import SeriesGap
from sbsim.engine.simulator import STEP, Action, AmbientSample, check_lattice

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DiurnalAmbient:
    """Sinusoidal outside temperature peaking at ``peak_hour`` (K)."""

    mean: float = 283.15
    amplitude: float = 5.0
    peak_hour: float = 15.0

    def at(self, timestamp: datetime) -> float:
        hours = timestamp.hour + timestamp.minute / 60.0 + timestamp.second / 3600.0
        phase = 2.0 * math.pi * (hours - self.peak_hour) / 24.0
        return self.mean + self.amplitude * math.cos(phase)


@dataclass(frozen=True)
class SyntheticScenario:
    """Inputs of one synthetic telemetry interval.

    Attributes:
        start: Timestamp of the first record (on the 5-minute lattice)
        records: Number of records to produce
        initial_zone_temperatures: One temperature for all zones, or per zone (K)
        ambient: Outside temperature model
        action: Constant setpoints, used where ``schedule`` has no entry
        schedule: Optional timestamp -> setpoints
        seed: Shuffle seed (the config seed when None)
    """

    start: datetime
    records: int
    initial_zone_temperatures: Union[float, Mapping[str, float]]
    ambient: DiurnalAmbient = DiurnalAmbient()
    action: Action = Action(333.15, 291.15)
    schedule: Optional[Mapping[datetime, Action]] = None
    seed: Optional[int] = None

    def action_at(self, timestamp: datetime) -> Action:
        if self.schedule is not None and timestamp in self.schedule:
            return self.schedule[timestamp]
        return self.action


def generate_telemetry(
    config: BuildingConfig,
    scenario: SyntheticScenario,
    parameters: Optional[PhysicalParameters] = None,
) -> TelemetrySeries:
    """Run the simulator and record what a building would report.

    Record ``k`` holds the zone temperatures after ``k`` steps together with
    the ambient temperature and setpoints applied during step ``k``, which is
    exactly what a replay of the series consumes.

    Args:
        config: Building configuration
        scenario: Interval to simulate
        parameters: Hidden parameters (the config's own when None)

    Returns:
        TelemetrySeries with ``scenario.records`` records
    """
    if scenario.records < 1:
        raise ValueError(f"Need at least one record, got {scenario.records}")
    check_lattice(scenario.start)
    if parameters is not None:
        config = config.with_parameters(parameters)
    simulator = assemble(config)

    if isinstance(scenario.initial_zone_temperatures, Mapping):
        initial = dict(scenario.initial_zone_temperatures)
    else:
        initial = {zone: float(scenario.initial_zone_temperatures) for zone in simulator.zone_ids}
    missing = sorted(set(simulator.zone_ids) - set(initial))
    if missing:
        raise SeriesGap(f"No initial temperature for zones: {', '.join(missing)}")

    t = scenario.start
    plant = config.simulation
    observation = simulator.initial_observation(
        t,
        initial,
        scenario.ambient.at(t),
        supply_air_temperature=plant.supply_air_setpoint,
        supply_water_temperature=plant.supply_water_setpoint,
    )
    state = simulator.reset(observation, scenario.seed)

    records = []
    zone_temperatures = state.zone_temperatures()
    supply_air = observation.supply_air_temperature
    supply_water = observation.supply_water_temperature
    for k in range(scenario.records):
        action = scenario.action_at(t)
        ambient = scenario.ambient.at(t)
        records.append(
            TelemetryRecord(
                timestamp=t,
                zone_temperatures=zone_temperatures,
                ambient_temperature=ambient,
                supply_water_setpoint=action.supply_water_setpoint,
                supply_air_setpoint=action.supply_air_setpoint,
                supply_water_temperature=supply_water,
                supply_air_temperature=supply_air,
            )
        )
        if k == scenario.records - 1:
            break
        state, obs, _ = simulator.step(state, action, AmbientSample(t, ambient))
        zone_temperatures = dict(obs.zone_temperatures)
        supply_air = obs.supply_air_temperature
        supply_water = obs.supply_water_temperature
        t = t + STEP

    logger.info(
        f"Generated {len(records)} synthetic records from {scenario.start.isoformat()}"
    )
    return TelemetrySeries(tuple(records), tuple(simulator.zone_ids))
