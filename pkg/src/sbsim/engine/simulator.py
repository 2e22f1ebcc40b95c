"""Simulation loop: reset from an observation, step, and replay a policy.

One step is a five minute interval:

1. zone means -> thermostat demands
2. plant step -> diffuser power and meter deltas
3. energy balance on every floor (substepped)
4. air shuffle within zones
5. observation and reward
"""

import copy
import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from typing import Optional

import numpy as np

from sbsim.core.errors import (
    MisalignedTimestamp,
    MissingZoneReading,
    SeriesGap,
    ZoneSetMismatch,
)
from sbsim.engine.reward import RewardBreakdown, RewardScales, RewardWeights, compute_reward
from sbsim.physics.grid import ThermalGrid, shuffle_air, step_energy_balance
from sbsim.physics.hvac import (
    Demand,
    EnergyMeters,
    HvacPlant,
    ZoneComfortSpec,
    plant_step,
    thermostat_demand,
)

logger = logging.getLogger(__name__)

STEP_SECONDS = 300.0
STEP = timedelta(seconds=STEP_SECONDS)

ZONE_FIELD_PREFIX = "zone_air_temperature:"


def on_lattice(timestamp: datetime) -> bool:
    """True if the timestamp falls on a five minute boundary."""
    return timestamp.minute % 5 == 0 and timestamp.second == 0 and timestamp.microsecond == 0


def check_lattice(timestamp: datetime) -> None:
    """Raise MisalignedTimestamp unless the timestamp is on the step lattice."""
    if not on_lattice(timestamp):
        raise MisalignedTimestamp(f"{timestamp.isoformat()} is not on the 5-minute lattice")


@dataclass(frozen=True)
class Action:
    """Agent setpoints (K)."""

    supply_water_setpoint: float
    supply_air_setpoint: float


@dataclass(frozen=True)
class AmbientSample:
    """Outside air temperature (K) at the start of a step."""

    timestamp: datetime
    temperature: float


@dataclass(frozen=True)
class Observation:
    """Sensor readings at one instant.

    Attributes:
        timestamp: Time of the readings
        zone_temperatures: Zone id -> mean air temperature (K)
        ambient_temperature: Outside air temperature (K)
        supply_air_temperature: Air handler discharge temperature (K)
        supply_water_temperature: Hot water loop temperature (K)
        supply_air_setpoint: Current air setpoint (K)
        supply_water_setpoint: Current water setpoint (K)
        meters: Cumulative energy and carbon since reset
    """

    timestamp: datetime
    zone_temperatures: dict[str, float]
    ambient_temperature: float
    supply_air_temperature: float
    supply_water_temperature: float
    supply_air_setpoint: float
    supply_water_setpoint: float
    meters: EnergyMeters = field(default_factory=EnergyMeters)

    def as_record(self) -> dict[str, float]:
        """Flat name -> value mapping (no timestamp)."""
        record = {
            f"{ZONE_FIELD_PREFIX}{zone}": t for zone, t in sorted(self.zone_temperatures.items())
        }
        record.update(
            {
                "outside_air_temperature": self.ambient_temperature,
                "supply_air_temperature": self.supply_air_temperature,
                "supply_water_temperature": self.supply_water_temperature,
                "supply_air_setpoint": self.supply_air_setpoint,
                "supply_water_setpoint": self.supply_water_setpoint,
                "electricity_j": self.meters.electricity,
                "natural_gas_j": self.meters.natural_gas,
                "carbon_kg": self.meters.carbon,
            }
        )
        return record

    def to_vector(self, names: Sequence[str]) -> np.ndarray:
        """Fixed-length vector in the order given by ``names``."""
        record = self.as_record()
        return np.array([record[name] for name in names], dtype=np.float64)


@dataclass(frozen=True)
class Transition:
    """Result of one step."""

    action: Action
    observation: Observation
    reward: RewardBreakdown
    meter_delta: EnergyMeters


@dataclass
class SimulatorState:
    """Mutable episode state.

    Attributes:
        timestamp: Start of the next step
        grids: Floor id -> thermal grid
        plant: HVAC plant
        rng: Generator used by the air shuffle
        demands: Zone id -> last thermostat demand
        ambient_temperature: Outside temperature of the last step (or reset)
        last_meter_delta: Energy and carbon used by the last step
        steps: Steps taken since reset
    """

    timestamp: datetime
    grids: dict[str, ThermalGrid]
    plant: HvacPlant
    rng: np.random.Generator
    demands: dict[str, Demand]
    ambient_temperature: float
    last_meter_delta: EnergyMeters = field(default_factory=EnergyMeters)
    steps: int = 0

    @property
    def meters(self) -> EnergyMeters:
        return self.plant.meters

    def zone_temperatures(self) -> dict[str, float]:
        temperatures = {}
        for grid in self.grids.values():
            for zone in grid.zone_ids:
                temperatures[zone] = grid.zone_mean(zone)
        return dict(sorted(temperatures.items()))

    def copy(self) -> "SimulatorState":
        """Independent snapshot: stepping the copy leaves this state untouched."""
        return SimulatorState(
            timestamp=self.timestamp,
            grids={floor: grid.copy() for floor, grid in self.grids.items()},
            plant=self.plant.copy(),
            rng=copy.deepcopy(self.rng),
            demands=dict(self.demands),
            ambient_temperature=self.ambient_temperature,
            last_meter_delta=self.last_meter_delta,
            steps=self.steps,
        )


@dataclass
class Trajectory:
    """Transitions of a replay and the state it ended in."""

    transitions: list[Transition]
    final_state: SimulatorState

    def __len__(self) -> int:
        return len(self.transitions)

    @property
    def observations(self) -> list[Observation]:
        return [t.observation for t in self.transitions]


class Simulator:
    """Static building description plus the step function.

    A Simulator never holds episode state; :meth:`reset` creates a
    :class:`SimulatorState` and :meth:`step` advances one.
    """

    def __init__(
        self,
        grids: Mapping[str, ThermalGrid],
        plant: HvacPlant,
        comfort: Mapping[str, ZoneComfortSpec],
        reward_weights: Optional[RewardWeights] = None,
        reward_scales: Optional[RewardScales] = None,
        seed: int = 0,
    ):
        """Initialize simulator.

        Args:
            grids: Floor id -> template grid (copied on every reset)
            plant: Template plant (copied on every reset)
            comfort: Zone id -> comfort band
            reward_weights: Cost weights
            reward_scales: Cost normalization
            seed: Default shuffle seed
        """
        self._grids = dict(grids)
        self._plant = plant
        self.comfort = dict(comfort)
        self.reward_weights = reward_weights or RewardWeights()
        self.reward_scales = reward_scales or RewardScales()
        self.seed = seed

        zones = sorted(zone for grid in self._grids.values() for zone in grid.zone_ids)
        missing = sorted(set(zones) - set(self.comfort))
        if missing:
            raise ValueError(f"No comfort band for zones: {', '.join(missing)}")
        self.zone_ids = zones

    @property
    def observation_names(self) -> list[str]:
        """Ordering manifest of :meth:`Observation.to_vector`."""
        return [f"{ZONE_FIELD_PREFIX}{zone}" for zone in self.zone_ids] + [
            "outside_air_temperature",
            "supply_air_temperature",
            "supply_water_temperature",
            "supply_air_setpoint",
            "supply_water_setpoint",
            "electricity_j",
            "natural_gas_j",
            "carbon_kg",
        ]

    def initial_observation(
        self,
        timestamp: datetime,
        zone_temperatures: Mapping[str, float],
        ambient_temperature: float,
        supply_air_temperature: Optional[float] = None,
        supply_water_temperature: Optional[float] = None,
    ) -> Observation:
        """Observation suitable for :meth:`reset`; supply temperatures default to the plant's."""
        ahu = self._plant.air_handler
        hws = self._plant.hot_water
        t_air = (
            ahu.supply_air_temperature
            if supply_air_temperature is None
            else supply_air_temperature
        )
        t_water = (
            hws.supply_water_temperature
            if supply_water_temperature is None
            else supply_water_temperature
        )
        return Observation(
            timestamp=timestamp,
            zone_temperatures=dict(zone_temperatures),
            ambient_temperature=ambient_temperature,
            supply_air_temperature=t_air,
            supply_water_temperature=t_water,
            supply_air_setpoint=t_air,
            supply_water_setpoint=t_water,
        )

    def reset(self, initial: Observation, seed: Optional[int] = None) -> SimulatorState:
        """Create a state whose zone means match an observation.

        Args:
            initial: Observation providing every zone temperature, the ambient
                temperature and the plant supply temperatures
            seed: Shuffle seed (defaults to the simulator seed)

        Raises:
            MissingZoneReading: If a zone is absent from the observation
            ZoneSetMismatch: If the observation names zones the building lacks
        """
        check_lattice(initial.timestamp)
        missing = sorted(set(self.zone_ids) - set(initial.zone_temperatures))
        if missing:
            raise MissingZoneReading(f"No reading for zones: {', '.join(missing)}")
        extra = sorted(set(initial.zone_temperatures) - set(self.zone_ids))
        if extra:
            raise ZoneSetMismatch(f"Observation has unknown zones: {', '.join(extra)}")

        grids = {}
        for floor_id, template in self._grids.items():
            grid = template.copy()
            grid.initialize(initial.zone_temperatures, initial.ambient_temperature)
            grids[floor_id] = grid

        plant = self._plant.copy()
        plant.reset_temperatures(initial.supply_air_temperature, initial.supply_water_temperature)

        state = SimulatorState(
            timestamp=initial.timestamp,
            grids=grids,
            plant=plant,
            rng=np.random.default_rng(self.seed if seed is None else seed),
            demands={zone: Demand.NONE for zone in self.zone_ids},
            ambient_temperature=initial.ambient_temperature,
        )
        logger.debug(f"Reset at {initial.timestamp.isoformat()} with {len(self.zone_ids)} zones")
        return state

    def observe(self, state: SimulatorState) -> Observation:
        """Observation of the state as it stands."""
        ahu = state.plant.air_handler
        hws = state.plant.hot_water
        return Observation(
            timestamp=state.timestamp,
            zone_temperatures=state.zone_temperatures(),
            ambient_temperature=state.ambient_temperature,
            supply_air_temperature=ahu.supply_air_temperature,
            supply_water_temperature=hws.supply_water_temperature,
            supply_air_setpoint=ahu.supply_air_setpoint,
            supply_water_setpoint=hws.supply_water_setpoint,
            meters=state.plant.meters,
        )

    def step(
        self, state: SimulatorState, action: Action, ambient: AmbientSample
    ) -> tuple[SimulatorState, Observation, RewardBreakdown]:
        """Advance the state by one five minute step (in place).

        Args:
            state: State to advance
            action: Supply water and supply air setpoints
            ambient: Outside temperature for this step, stamped with the step start

        Returns:
            The advanced state, the observation at the end of the step and the reward

        Raises:
            ActuatorLimitViolation: If the action is outside the plant's limits
            MisalignedTimestamp: If the ambient sample is off the lattice
            SeriesGap: If the ambient sample is not for the current step
            NonFiniteTemperature: If the physics diverges
        """
        check_lattice(ambient.timestamp)
        if ambient.timestamp != state.timestamp:
            raise SeriesGap(
                f"Ambient sample at {ambient.timestamp.isoformat()} but the step starts at "
                f"{state.timestamp.isoformat()}"
            )
        state.plant.check_action(action)

        zone_temperatures = state.zone_temperatures()
        demands = {
            zone: thermostat_demand(t, self.comfort[zone], state.demands.get(zone, Demand.NONE))
            for zone, t in zone_temperatures.items()
        }
        diffuser_power, delta = plant_step(
            state.plant, demands, zone_temperatures, action, ambient.temperature, STEP_SECONDS
        )

        for floor_id, grid in state.grids.items():
            forcing = {
                (row, col): power
                for (floor, row, col), power in diffuser_power.items()
                if floor == floor_id
            }
            step_energy_balance(grid, STEP_SECONDS, forcing, ambient.temperature)
        for grid in state.grids.values():
            shuffle_air(grid, state.rng)

        state.demands = demands
        state.ambient_temperature = ambient.temperature
        state.last_meter_delta = delta
        state.timestamp = state.timestamp + STEP
        state.steps += 1

        observation = self.observe(state)
        reward = compute_reward(
            delta,
            observation.zone_temperatures,
            self.comfort,
            self.reward_weights,
            self.reward_scales,
        )
        return state, observation, reward


def replay(
    simulator: Simulator,
    state: SimulatorState,
    actions: Mapping[datetime, Action],
    ambient: Mapping[datetime, float],
    steps: int,
) -> Trajectory:
    """Replay a recorded policy for ``steps`` steps.

    The input state is not modified. Step ``k`` uses the action and ambient
    temperature stamped ``state.timestamp + k * 5 min``.

    Args:
        simulator: Simulator to step
        state: Starting state
        actions: Timestamp -> setpoints
        ambient: Timestamp -> outside temperature (K)
        steps: Number of steps

    Returns:
        One transition per step and the final state

    Raises:
        MisalignedTimestamp: If any series timestamp is off the lattice
        SeriesGap: If a step's action or ambient sample is missing
    """
    if steps < 0:
        raise ValueError(f"Step count must be non-negative, got {steps}")
    for timestamp in list(actions) + list(ambient):
        check_lattice(timestamp)

    current = state.copy()
    transitions = []
    for _ in range(steps):
        t = current.timestamp
        if t not in actions:
            raise SeriesGap(f"No setpoints for {t.isoformat()}")
        if t not in ambient:
            raise SeriesGap(f"No ambient temperature for {t.isoformat()}")
        action = actions[t]
        current, observation, reward = simulator.step(
            current, action, AmbientSample(t, ambient[t])
        )
        transitions.append(Transition(action, observation, reward, current.last_meter_delta))
    return Trajectory(transitions, current)
