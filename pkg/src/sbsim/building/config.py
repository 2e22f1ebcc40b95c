"""Validated building configuration: geometry, devices, parameters and plant.

``load_building_config`` is the single entry point used by the CLI; tests and
the calibration harness can also build a :class:`BuildingConfig` directly with
:func:`make_building_config`.
"""

import dataclasses
import logging
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Optional, Union

from dateutil import parser as date_parser  # type: ignore[import-untyped]

from sbsim.building.devices import DevicePlacement, load_devices, resolve_placements
from sbsim.building.floorplan import FloorplanDoc, load_floorplan
from sbsim.core.config import ManifestManager
from sbsim.core.errors import (
    InvalidDeviceLine,
    ManifestInvalid,
    ParameterOutOfBounds,
    UnknownZone,
)
from sbsim.engine.reward import RewardScales, RewardWeights
from sbsim.physics.grid import AIR, CellKind, Material
from sbsim.physics.hvac import (
    ActuatorLimits,
    EmissionFactors,
    PlantConstants,
    VavDevice,
    ZoneComfortSpec,
)

logger = logging.getLogger(__name__)

# Calibrated physical parameters and their search box.
PARAMETER_BOUNDS: dict[str, tuple[float, float]] = {
    "exterior_convection_coefficient": (5.0, 800.0),  # W/m^2/K
    "exterior_wall_conductivity": (0.01, 1.0),  # W/m/K
    "exterior_wall_density": (1.0, 3000.0),  # kg/m^3
    "exterior_wall_heat_capacity": (100.0, 2500.0),  # J/kg/K
    "interior_wall_conductivity": (5.0, 800.0),  # W/m/K
    "interior_wall_density": (0.5, 1500.0),  # kg/m^3
    "interior_wall_heat_capacity": (500.0, 1500.0),  # J/kg/K
    "shuffle_probability": (0.0, 1.0),
}

PARAMETER_NAMES: tuple[str, ...] = tuple(PARAMETER_BOUNDS)


@dataclass(frozen=True)
class PhysicalParameters:
    """The eight calibrated physical parameters."""

    exterior_convection_coefficient: float
    exterior_wall_conductivity: float
    exterior_wall_density: float
    exterior_wall_heat_capacity: float
    interior_wall_conductivity: float
    interior_wall_density: float
    interior_wall_heat_capacity: float
    shuffle_probability: float

    def __post_init__(self) -> None:
        for name, (low, high) in PARAMETER_BOUNDS.items():
            value = getattr(self, name)
            if not (math.isfinite(value) and low <= value <= high):
                raise ParameterOutOfBounds(f"{name}={value} outside [{low}, {high}]")

    @classmethod
    def midpoint(cls) -> "PhysicalParameters":
        """Parameters at the centre of the search box."""
        return cls(**{name: (low + high) / 2.0 for name, (low, high) in PARAMETER_BOUNDS.items()})

    @classmethod
    def from_vector(cls, values: Sequence[float]) -> "PhysicalParameters":
        if len(values) != len(PARAMETER_NAMES):
            raise ValueError(f"Expected {len(PARAMETER_NAMES)} parameters, got {len(values)}")
        return cls(**{name: float(v) for name, v in zip(PARAMETER_NAMES, values)})

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> "PhysicalParameters":
        """Build from a name -> value mapping; omitted names take the midpoint.

        Raises:
            ManifestInvalid: If a name is not a calibrated parameter
            ParameterOutOfBounds: If a value is outside its bounds
        """
        unknown = sorted(set(values) - set(PARAMETER_NAMES))
        if unknown:
            raise ManifestInvalid(f"Unknown parameters: {', '.join(unknown)}")
        merged = dataclasses.asdict(cls.midpoint())
        merged.update({k: float(v) for k, v in values.items()})
        return cls(**merged)

    def updated(self, values: Mapping[str, Any]) -> "PhysicalParameters":
        """Copy with some values replaced.

        Raises:
            ManifestInvalid: If a name is not a calibrated parameter
            ParameterOutOfBounds: If a value is outside its bounds
        """
        unknown = sorted(set(values) - set(PARAMETER_NAMES))
        if unknown:
            raise ManifestInvalid(f"Unknown parameters: {', '.join(unknown)}")
        return dataclasses.replace(self, **{k: float(v) for k, v in values.items()})

    def to_vector(self) -> list[float]:
        return [getattr(self, name) for name in PARAMETER_NAMES]

    def to_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in PARAMETER_NAMES}

    def materials(self, air: Material = AIR) -> dict[CellKind, Material]:
        """Material per cell kind implied by these parameters."""
        return {
            CellKind.EXTERIOR_WALL: Material(
                self.exterior_wall_conductivity,
                self.exterior_wall_density,
                self.exterior_wall_heat_capacity,
            ),
            CellKind.INTERIOR_WALL: Material(
                self.interior_wall_conductivity,
                self.interior_wall_density,
                self.interior_wall_heat_capacity,
            ),
            CellKind.INTERIOR_AIR: air,
        }


@dataclass(frozen=True)
class SimulationSettings:
    """Episode defaults used when the caller does not supply them."""

    seed: int = 0
    start: datetime = datetime(2024, 1, 1)
    initial_zone_temperature: float = 294.15
    ambient_temperature: float = 283.15
    supply_water_setpoint: float = 333.15
    supply_air_setpoint: float = 291.15


@dataclass(frozen=True)
class BuildingConfig:
    """Everything needed to assemble a simulator.

    Attributes:
        name: Building name
        floors: Floorplans, one per floor
        devices: Device placements with floors resolved
        comfort: Comfort band per zone
        parameters: Calibrated physical parameters
        plant: Central plant constants (emission factors included)
        reward_weights: Cost weights
        reward_scales: Cost normalization
        air: Interior air material
        simulation: Episode defaults
        source: Manifest the config was loaded from, if any
    """

    name: str
    floors: tuple[FloorplanDoc, ...]
    devices: tuple[DevicePlacement, ...]
    comfort: dict[str, ZoneComfortSpec]
    parameters: PhysicalParameters
    plant: PlantConstants
    reward_weights: RewardWeights = field(default_factory=RewardWeights)
    reward_scales: RewardScales = field(default_factory=RewardScales)
    air: Material = AIR
    simulation: SimulationSettings = field(default_factory=SimulationSettings)
    source: Optional[Path] = None

    @property
    def zone_ids(self) -> list[str]:
        return sorted(zone for floor in self.floors for zone in floor.zones)

    @property
    def vavs(self) -> list[VavDevice]:
        vavs = []
        for placement in self.devices:
            if placement.device_type != "vav":
                continue
            try:
                vavs.append(
                    VavDevice(
                        device_id=placement.device_id,
                        zone_id=placement.zone_id or "",
                        floor_id=placement.floor_id or "",
                        diffusers=placement.diffusers,
                        design_flow=placement.constants["design_flow"],
                        reheat_effectiveness=placement.constants["reheat_effectiveness"],
                    )
                )
            except ValueError as e:
                raise InvalidDeviceLine(str(e), None, placement.line)
        return vavs

    def with_parameters(self, parameters: PhysicalParameters) -> "BuildingConfig":
        """Copy of this config with a different parameter vector."""
        return dataclasses.replace(self, parameters=parameters)

    def with_seed(self, seed: int) -> "BuildingConfig":
        return dataclasses.replace(
            self, simulation=dataclasses.replace(self.simulation, seed=int(seed))
        )


def plant_constants_from_devices(
    devices: Sequence[DevicePlacement],
    emission_factors: Optional[EmissionFactors] = None,
) -> PlantConstants:
    """Collect central plant constants from the ahu, boiler and chiller placements.

    Raises:
        InvalidDeviceLine: If a constant is physically invalid
    """
    by_type = {d.device_type: d for d in devices if d.device_type != "vav"}
    ahu, boiler, chiller = by_type["ahu"], by_type["boiler"], by_type["chiller"]
    try:
        return PlantConstants(
            supply_air_limits=ActuatorLimits(
                ahu.constants["setpoint_min"], ahu.constants["setpoint_max"]
            ),
            supply_water_limits=ActuatorLimits(
                boiler.constants["setpoint_min"], boiler.constants["setpoint_max"]
            ),
            supply_air_time_constant=ahu.constants["time_constant"],
            supply_water_time_constant=boiler.constants["time_constant"],
            recirc_fraction=ahu.constants["recirc_fraction"],
            intake_fan_power=ahu.constants["intake_fan_power"],
            exhaust_fan_power=ahu.constants["exhaust_fan_power"],
            boiler_efficiency=boiler.constants["efficiency"],
            boiler_pump_power=boiler.constants["pump_power"],
            loop_loss_fraction=boiler.constants["loop_loss_fraction"],
            chiller_cop=chiller.constants["cop"],
            chiller_pump_power=chiller.constants["pump_power"],
            ventilation_damper=ahu.constants["ventilation_damper"],
            emission_factors=emission_factors or EmissionFactors(),
        )
    except ValueError as e:
        raise InvalidDeviceLine(str(e))


def make_building_config(
    floors: Sequence[FloorplanDoc],
    devices: Sequence[DevicePlacement],
    *,
    parameters: Optional[PhysicalParameters] = None,
    comfort_default: Optional[Mapping[str, float]] = None,
    comfort_zones: Optional[Mapping[str, Mapping[str, float]]] = None,
    reward_weights: Optional[RewardWeights] = None,
    reward_scales: Optional[RewardScales] = None,
    emission_factors: Optional[EmissionFactors] = None,
    air: Material = AIR,
    simulation: Optional[SimulationSettings] = None,
    name: str = "building",
    source: Optional[Path] = None,
) -> BuildingConfig:
    """Cross-validate parsed documents and build a BuildingConfig.

    Args:
        floors: Parsed floorplans
        devices: Parsed device placements (resolved against ``floors`` here)
        parameters: Physical parameters (midpoint of the bounds when omitted)
        comfort_default: Comfort band applied to zones without their own entry
        comfort_zones: Zone id -> comfort band overrides
        reward_weights: Cost weights
        reward_scales: Cost normalization
        emission_factors: Carbon intensity of electricity and gas
        air: Interior air material
        simulation: Episode defaults
        name: Building name
        source: Manifest path for diagnostics

    Raises:
        ManifestInvalid: Duplicate floor ids or zone ids shared between floors
        UnknownZone: Comfort override for a zone that does not exist
    """
    if not floors:
        raise ManifestInvalid("Building has no floors", source)
    seen_floors: set[str] = set()
    zone_floor: dict[str, str] = {}
    for floor in floors:
        if floor.floor_id in seen_floors:
            raise ManifestInvalid(f"Duplicate floor id {floor.floor_id!r}", source)
        seen_floors.add(floor.floor_id)
        for zone in floor.zones:
            if zone in zone_floor:
                raise ManifestInvalid(
                    f"Zone {zone!r} appears on floors {zone_floor[zone]} and {floor.floor_id}",
                    source,
                )
            zone_floor[zone] = floor.floor_id

    resolved = resolve_placements(devices, floors)

    band = {"heating_setpoint": 293.15, "cooling_setpoint": 297.15, "deadband": 0.5}
    band.update(comfort_default or {})
    overrides = dict(comfort_zones or {})
    for zone in sorted(set(overrides) - set(zone_floor)):
        raise UnknownZone(f"Comfort band given for unknown zone {zone!r}", source)
    comfort = {}
    for zone in sorted(zone_floor):
        zone_band = dict(band)
        zone_band.update(overrides.get(zone, {}))
        try:
            comfort[zone] = ZoneComfortSpec(zone_id=zone, **zone_band)
        except ValueError as e:
            raise ManifestInvalid(str(e), source)

    config = BuildingConfig(
        name=name,
        floors=tuple(floors),
        devices=tuple(resolved),
        comfort=comfort,
        parameters=parameters or PhysicalParameters.midpoint(),
        plant=plant_constants_from_devices(resolved, emission_factors),
        reward_weights=reward_weights or RewardWeights(),
        reward_scales=reward_scales or RewardScales(),
        air=air,
        simulation=simulation or SimulationSettings(),
        source=source,
    )
    # VAV constants are checked here so errors surface at load time
    _ = config.vavs
    return config


def load_building_config(manifest_path: Union[str, Path]) -> BuildingConfig:
    """Load a manifest and every file it references.

    Args:
        manifest_path: Path to the YAML manifest

    Returns:
        Validated BuildingConfig

    Raises:
        ConfigError: Any manifest, floorplan, device or parameter problem
    """
    manifest = ManifestManager(manifest_path)
    floors = [load_floorplan(manifest.resolve_path(p)) for p in manifest.get("floors")]
    devices_path = manifest.resolve_path(manifest.get("devices"))
    devices = load_devices(devices_path, floors)

    sim = manifest.get("simulation")
    try:
        start = date_parser.isoparse(sim["start"])
    except ValueError:
        raise ManifestInvalid(f"simulation.start {sim['start']!r} is not ISO-8601", manifest_path)

    try:
        weights = RewardWeights(**manifest.get("reward.weights"))
        scales = RewardScales(**manifest.get("reward.scales"))
        factors = EmissionFactors(**manifest.get("emission_factors"))
        air = Material(**manifest.get("air"))
    except ValueError as e:
        raise ManifestInvalid(str(e), manifest_path)

    try:
        parameters = PhysicalParameters.from_mapping(manifest.get("parameters", {}))
    except ParameterOutOfBounds as e:
        raise ParameterOutOfBounds(e.message, manifest_path)

    config = make_building_config(
        floors,
        devices,
        parameters=parameters,
        comfort_default=manifest.get("comfort.default"),
        comfort_zones=manifest.get("comfort.zones", {}),
        reward_weights=weights,
        reward_scales=scales,
        emission_factors=factors,
        air=air,
        simulation=SimulationSettings(
            seed=sim["seed"],
            start=start,
            initial_zone_temperature=sim["initial_zone_temperature"],
            ambient_temperature=sim["ambient_temperature"],
            supply_water_setpoint=sim["supply_water_setpoint"],
            supply_air_setpoint=sim["supply_air_setpoint"],
        ),
        name=manifest.get("name", "building"),
        source=Path(manifest_path),
    )
    logger.info(
        f"Loaded {config.name}: {len(config.floors)} floor(s), "
        f"{len(config.zone_ids)} zone(s), {len(config.devices)} device(s)"
    )
    return config
