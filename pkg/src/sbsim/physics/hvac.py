"""Energy-balance HVAC plant: air handler, hot water loop, chiller and VAVs.

The plant turns zone demands and the two agent setpoints into diffuser
power for the thermal grid and meters the electricity, gas and carbon it
costs. Supply temperatures follow their setpoints with a first-order lag;
the chiller has a constant COP and the boiler a constant efficiency.
"""

import copy
import logging
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from enum import Enum
from typing import Protocol

from sbsim.core.errors import ActuatorLimitViolation

logger = logging.getLogger(__name__)

AIR_SPECIFIC_HEAT = 1006.0  # J/kg/K

DiffuserKey = tuple[str, int, int]


class Demand(Enum):
    """Thermostat call for a zone."""

    HEATING = "heating"
    COOLING = "cooling"
    NONE = "none"


@dataclass(frozen=True)
class ZoneComfortSpec:
    """Comfort band of one zone.

    Attributes:
        zone_id: Zone identifier
        heating_setpoint: Lower setpoint (K); below it the zone calls for heat
        cooling_setpoint: Upper setpoint (K); above it the zone calls for cooling
        deadband: Hysteresis width (K) before an active call is released
    """

    zone_id: str
    heating_setpoint: float
    cooling_setpoint: float
    deadband: float = 0.5

    def __post_init__(self) -> None:
        if self.deadband < 0:
            raise ValueError(f"Deadband for zone {self.zone_id} must be non-negative")
        if not self.heating_setpoint + self.deadband < self.cooling_setpoint:
            raise ValueError(
                f"Zone {self.zone_id}: heating setpoint + deadband must be below cooling setpoint"
            )

    def deviation(self, zone_temperature: float) -> float:
        """Distance outside the comfort band (K), zero inside it."""
        return max(0.0, zone_temperature - self.cooling_setpoint) + max(
            0.0, self.heating_setpoint - zone_temperature
        )


def thermostat_demand(
    zone_temperature: float, spec: ZoneComfortSpec, previous: Demand = Demand.NONE
) -> Demand:
    """Evaluate a thermostat with hysteresis.

    An active call persists until the zone temperature passes its setpoint by
    the deadband; otherwise the zone calls for heat below the heating setpoint
    and for cooling above the cooling setpoint.

    Args:
        zone_temperature: Measured zone temperature (K)
        spec: Zone comfort band
        previous: Demand from the previous step

    Returns:
        New demand
    """
    if previous is Demand.HEATING and zone_temperature < spec.heating_setpoint + spec.deadband:
        return Demand.HEATING
    if previous is Demand.COOLING and zone_temperature > spec.cooling_setpoint - spec.deadband:
        return Demand.COOLING
    if zone_temperature < spec.heating_setpoint:
        return Demand.HEATING
    if zone_temperature > spec.cooling_setpoint:
        return Demand.COOLING
    return Demand.NONE


def mix_air(t_return: float, t_ambient: float, recirc_fraction: float) -> float:
    """Mixed-air temperature of recirculated and fresh air (K)."""
    if not 0.0 <= recirc_fraction <= 1.0:
        raise ValueError(f"Recirculation fraction must be within [0, 1], got {recirc_fraction}")
    return recirc_fraction * t_return + (1.0 - recirc_fraction) * t_ambient


@dataclass(frozen=True)
class EmissionFactors:
    """Carbon intensity of each energy carrier (kg CO2e per J)."""

    electricity_kg_per_j: float = 1.1e-7
    gas_kg_per_j: float = 5.0e-8

    def __post_init__(self) -> None:
        if self.electricity_kg_per_j < 0 or self.gas_kg_per_j < 0:
            raise ValueError("Emission factors must be non-negative")


def carbon_from_energy(electricity: float, gas: float, factors: EmissionFactors) -> float:
    """Carbon emitted by the given electricity and gas use (kg CO2e)."""
    return electricity * factors.electricity_kg_per_j + gas * factors.gas_kg_per_j


@dataclass(frozen=True)
class EnergyMeters:
    """Cumulative (or per-step delta) energy and carbon meters.

    Attributes:
        electricity: Fans, pumps and compressor (J)
        natural_gas: Boiler fuel (J)
        carbon: Emissions (kg CO2e)
    """

    electricity: float = 0.0
    natural_gas: float = 0.0
    carbon: float = 0.0

    def __add__(self, other: "EnergyMeters") -> "EnergyMeters":
        return EnergyMeters(
            electricity=self.electricity + other.electricity,
            natural_gas=self.natural_gas + other.natural_gas,
            carbon=self.carbon + other.carbon,
        )

    @property
    def total_energy(self) -> float:
        return self.electricity + self.natural_gas


@dataclass(frozen=True)
class ActuatorLimits:
    """Inclusive bounds on a setpoint (K)."""

    low: float
    high: float

    def __post_init__(self) -> None:
        if not self.low < self.high:
            raise ValueError(
                f"Actuator limits must satisfy low < high, got {self.low}, {self.high}"
            )

    def contains(self, value: float) -> bool:
        return math.isfinite(value) and self.low <= value <= self.high


@dataclass(frozen=True)
class VavDevice:
    """Static description of a VAV box and the diffusers it feeds."""

    device_id: str
    zone_id: str
    floor_id: str
    diffusers: tuple[tuple[int, int], ...]
    design_flow: float = 0.5
    reheat_effectiveness: float = 0.8

    def __post_init__(self) -> None:
        if not self.diffusers:
            raise ValueError(f"VAV {self.device_id} has no diffusers")
        if self.design_flow < 0:
            raise ValueError(f"VAV {self.device_id} design flow must be non-negative")
        if not 0.0 <= self.reheat_effectiveness <= 1.0:
            raise ValueError(f"VAV {self.device_id} reheat effectiveness must be within [0, 1]")


@dataclass(frozen=True)
class PlantConstants:
    """Device constants of the central plant."""

    supply_air_limits: ActuatorLimits = ActuatorLimits(285.15, 300.15)
    supply_water_limits: ActuatorLimits = ActuatorLimits(310.15, 360.15)
    supply_air_time_constant: float = 900.0
    supply_water_time_constant: float = 900.0
    recirc_fraction: float = 0.3
    intake_fan_power: float = 2000.0
    exhaust_fan_power: float = 1500.0
    boiler_efficiency: float = 0.9
    boiler_pump_power: float = 500.0
    loop_loss_fraction: float = 0.05
    chiller_cop: float = 3.5
    chiller_pump_power: float = 800.0
    ventilation_damper: float = 0.2
    emission_factors: EmissionFactors = field(default_factory=EmissionFactors)

    def __post_init__(self) -> None:
        if not 0.0 < self.boiler_efficiency <= 1.0:
            raise ValueError("Boiler efficiency must be within (0, 1]")
        if not self.chiller_cop > 0:
            raise ValueError("Chiller COP must be positive")
        if self.supply_air_time_constant <= 0 or self.supply_water_time_constant <= 0:
            raise ValueError("Time constants must be positive")
        if not 0.0 <= self.recirc_fraction <= 1.0:
            raise ValueError("Recirculation fraction must be within [0, 1]")
        if not 0.0 <= self.ventilation_damper <= 1.0:
            raise ValueError("Ventilation damper fraction must be within [0, 1]")
        if self.loop_loss_fraction < 0:
            raise ValueError("Loop loss fraction must be non-negative")


@dataclass
class AirHandlerState:
    supply_air_setpoint: float
    supply_air_temperature: float
    intake_flow: float = 0.0
    exhaust_flow: float = 0.0
    recirc_flow: float = 0.0
    exhaust_temperature: float = 0.0
    mixed_air_temperature: float = 0.0
    intake_fan_power: float = 0.0
    exhaust_fan_power: float = 0.0


@dataclass
class HotWaterState:
    supply_water_setpoint: float
    supply_water_temperature: float
    boiler_gas_power: float = 0.0
    pump_power: float = 0.0


@dataclass
class ChillerState:
    compressor_power: float = 0.0
    coolant_pump_power: float = 0.0


@dataclass
class VavState:
    device_id: str
    zone_id: str
    damper_fraction: float = 0.0
    supplied_power: float = 0.0
    recirculated_power: float = 0.0


class SetpointAction(Protocol):
    supply_water_setpoint: float
    supply_air_setpoint: float


class HvacPlant:
    """Mutable plant state plus the static device description."""

    def __init__(
        self,
        constants: PlantConstants,
        vavs: Sequence[VavDevice],
        supply_air_temperature: float = 291.15,
        supply_water_temperature: float = 333.15,
    ):
        """Initialize plant.

        Args:
            constants: Central plant constants
            vavs: VAV boxes, in a fixed order
            supply_air_temperature: Initial supply air temperature and setpoint (K)
            supply_water_temperature: Initial supply water temperature and setpoint (K)
        """
        self.constants = constants
        self.vavs = list(vavs)
        self.air_handler = AirHandlerState(supply_air_temperature, supply_air_temperature)
        self.hot_water = HotWaterState(supply_water_temperature, supply_water_temperature)
        self.chiller = ChillerState()
        self.vav_states = [VavState(v.device_id, v.zone_id) for v in self.vavs]
        self.meters = EnergyMeters()

    def reset_temperatures(self, supply_air: float, supply_water: float) -> None:
        """Set supply temperatures (and their setpoints) and zero the meters."""
        self.air_handler = AirHandlerState(supply_air, supply_air)
        self.hot_water = HotWaterState(supply_water, supply_water)
        self.chiller = ChillerState()
        self.vav_states = [VavState(v.device_id, v.zone_id) for v in self.vavs]
        self.meters = EnergyMeters()

    def check_action(self, action: SetpointAction) -> None:
        """Raise if a setpoint lies outside its actuator limits.

        Raises:
            ActuatorLimitViolation: If either setpoint is out of range
        """
        water = self.constants.supply_water_limits
        air = self.constants.supply_air_limits
        if not water.contains(action.supply_water_setpoint):
            raise ActuatorLimitViolation(
                f"Supply water setpoint {action.supply_water_setpoint} K outside "
                f"[{water.low}, {water.high}]"
            )
        if not air.contains(action.supply_air_setpoint):
            raise ActuatorLimitViolation(
                f"Supply air setpoint {action.supply_air_setpoint} K outside "
                f"[{air.low}, {air.high}]"
            )

    def copy(self) -> "HvacPlant":
        return copy.deepcopy(self)


def _lag(value: float, setpoint: float, time_constant: float, dt: float) -> float:
    return setpoint + (value - setpoint) * math.exp(-dt / time_constant)


def plant_step(
    plant: HvacPlant,
    demands: Mapping[str, Demand],
    zone_temperatures: Mapping[str, float],
    action: SetpointAction,
    ambient_temperature: float,
    dt: float,
) -> tuple[dict[DiffuserKey, float], EnergyMeters]:
    """Advance the plant one step.

    Args:
        plant: Plant to update in place
        demands: Zone id -> thermostat demand
        zone_temperatures: Zone id -> mean air temperature (K)
        action: Supply water and supply air setpoints (K)
        ambient_temperature: Outside air temperature (K)
        dt: Step length (s)

    Returns:
        Diffuser power keyed by ``(floor_id, row, col)`` and the meter delta

    Raises:
        ActuatorLimitViolation: If the action is outside the configured limits
    """
    if not dt > 0:
        raise ValueError(f"Step length must be positive, got {dt}")
    plant.check_action(action)
    constants = plant.constants
    ahu = plant.air_handler
    hws = plant.hot_water

    ahu.supply_air_setpoint = action.supply_air_setpoint
    ahu.supply_air_temperature = _lag(
        ahu.supply_air_temperature,
        action.supply_air_setpoint,
        constants.supply_air_time_constant,
        dt,
    )
    hws.supply_water_setpoint = action.supply_water_setpoint
    hws.supply_water_temperature = _lag(
        hws.supply_water_temperature,
        action.supply_water_setpoint,
        constants.supply_water_time_constant,
        dt,
    )
    t_supply = ahu.supply_air_temperature
    t_water = hws.supply_water_temperature

    diffuser_power: dict[DiffuserKey, float] = {}
    cooling_delivered = 0.0
    reheat_delivered = 0.0
    total_flow = 0.0
    return_enthalpy = 0.0

    for vav, state in zip(plant.vavs, plant.vav_states):
        t_zone = zone_temperatures[vav.zone_id]
        demand = demands.get(vav.zone_id, Demand.NONE)
        damper = 1.0 if demand is not Demand.NONE else constants.ventilation_damper
        flow = vav.design_flow * damper

        supplied = 0.0
        if demand is Demand.COOLING:
            supplied = min(0.0, flow * AIR_SPECIFIC_HEAT * (t_supply - t_zone))
            cooling_delivered -= supplied
        elif demand is Demand.HEATING:
            supplied = max(
                0.0, vav.reheat_effectiveness * flow * AIR_SPECIFIC_HEAT * (t_water - t_zone)
            )
            reheat_delivered += supplied

        state.damper_fraction = damper
        state.supplied_power = supplied
        state.recirculated_power = flow * AIR_SPECIFIC_HEAT * (t_zone - t_supply)

        share = supplied / len(vav.diffusers)
        for row, col in vav.diffusers:
            key = (vav.floor_id, row, col)
            diffuser_power[key] = diffuser_power.get(key, 0.0) + share

        total_flow += flow
        return_enthalpy += flow * t_zone

    # Air handler mass balance
    f = constants.recirc_fraction
    t_return = return_enthalpy / total_flow if total_flow > 0 else ambient_temperature
    ahu.recirc_flow = f * total_flow
    ahu.intake_flow = (1.0 - f) * total_flow
    ahu.exhaust_flow = ahu.intake_flow
    ahu.exhaust_temperature = t_return
    ahu.mixed_air_temperature = mix_air(t_return, ambient_temperature, f)
    # fans and circulation pumps run whenever air flows, with or without load
    running = total_flow > 0
    ahu.intake_fan_power = constants.intake_fan_power if running else 0.0
    ahu.exhaust_fan_power = constants.exhaust_fan_power if running else 0.0

    chiller = plant.chiller
    chiller.compressor_power = cooling_delivered / constants.chiller_cop
    chiller.coolant_pump_power = constants.chiller_pump_power if running else 0.0

    loop_loss = constants.loop_loss_fraction * reheat_delivered
    hws.boiler_gas_power = reheat_delivered + loop_loss
    hws.pump_power = constants.boiler_pump_power if running else 0.0

    electric_power = (
        ahu.intake_fan_power
        + ahu.exhaust_fan_power
        + chiller.compressor_power
        + chiller.coolant_pump_power
        + hws.pump_power
    )
    electricity = electric_power * dt
    gas = hws.boiler_gas_power * dt / constants.boiler_efficiency
    delta = EnergyMeters(
        electricity=electricity,
        natural_gas=gas,
        carbon=carbon_from_energy(electricity, gas, constants.emission_factors),
    )
    plant.meters = plant.meters + delta

    logger.debug(
        f"Plant step: cooling {cooling_delivered:.1f} W, reheat {reheat_delivered:.1f} W, "
        f"flow {total_flow:.3f} kg/s"
    )
    return diffuser_power, delta
