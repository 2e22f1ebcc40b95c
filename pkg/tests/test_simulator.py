"""Tests for the simulator engine: reset, step and replay."""

import time
from datetime import datetime, timedelta

import numpy as np
import pytest  # type: ignore[import-not-found]

from sbsim.building.assembly import assemble
from sbsim.building.config import BuildingConfig, PhysicalParameters, make_building_config
from sbsim.building.devices import parse_devices
from sbsim.building.floorplan import parse_floorplan
from sbsim.core.errors import (
    ActuatorLimitViolation,
    MisalignedTimestamp,
    MissingZoneReading,
    SeriesGap,
    ZoneSetMismatch,
)
from sbsim.engine.inputs import constant_series
from sbsim.engine.simulator import (
    STEP,
    Action,
    AmbientSample,
    Simulator,
    SimulatorState,
    on_lattice,
    replay,
)

START = datetime(2024, 1, 1, 0, 0)
ACTION = Action(333.15, 291.15)


@pytest.fixture  # type: ignore[misc]
def simulator(small_config: BuildingConfig) -> Simulator:
    """Simulator for the small two-zone building."""
    return assemble(small_config)


def reset(simulator: Simulator, seed: int = 0) -> SimulatorState:
    initial = simulator.initial_observation(START, {"A": 294.0, "B": 298.0}, 283.15)
    return simulator.reset(initial, seed)


class TestLattice:
    """Test the five minute lattice."""

    def test_on_lattice(self) -> None:
        """Test aligned and misaligned timestamps."""
        assert on_lattice(datetime(2024, 7, 6, 1, 40))
        assert not on_lattice(datetime(2024, 7, 6, 1, 41))
        assert not on_lattice(datetime(2024, 7, 6, 1, 40, 30))


class TestReset:
    """Test Simulator.reset."""

    def test_zone_means_match_observation(self, simulator: Simulator) -> None:
        """Test that reset reproduces the zone readings exactly."""
        state = reset(simulator)

        assert state.zone_temperatures() == {"A": 294.0, "B": 298.0}
        assert state.timestamp == START
        assert state.steps == 0
        assert state.meters.total_energy == 0.0

    def test_missing_zone(self, simulator: Simulator) -> None:
        """Test that every zone needs a reading."""
        initial = simulator.initial_observation(START, {"A": 294.0}, 283.15)
        with pytest.raises(MissingZoneReading):
            simulator.reset(initial)

    def test_extra_zone(self, simulator: Simulator) -> None:
        """Test that unknown zones are rejected."""
        initial = simulator.initial_observation(START, {"A": 294.0, "B": 298.0, "C": 1.0}, 283.15)
        with pytest.raises(ZoneSetMismatch):
            simulator.reset(initial)

    def test_misaligned_timestamp(self, simulator: Simulator) -> None:
        """Test that reset requires a lattice timestamp."""
        initial = simulator.initial_observation(
            START + timedelta(minutes=2), {"A": 294.0, "B": 298.0}, 283.15
        )
        with pytest.raises(MisalignedTimestamp):
            simulator.reset(initial)

    def test_reset_does_not_touch_templates(self, simulator: Simulator) -> None:
        """Test that episodes are independent."""
        first = reset(simulator)
        simulator.step(first, ACTION, AmbientSample(START, 283.15))
        second = reset(simulator)

        assert second.zone_temperatures() == {"A": 294.0, "B": 298.0}


class TestStep:
    """Test Simulator.step."""

    def test_step_advances_time(self, simulator: Simulator) -> None:
        """Test timestamp, step count and observation."""
        state = reset(simulator)
        state, observation, reward = simulator.step(state, ACTION, AmbientSample(START, 283.15))

        assert state.timestamp == START + STEP
        assert state.steps == 1
        assert observation.timestamp == START + STEP
        assert observation.supply_water_setpoint == ACTION.supply_water_setpoint
        assert observation.ambient_temperature == 283.15
        assert reward.total <= 0.0

    def test_observe_matches_step(self, simulator: Simulator) -> None:
        """Test that observing after a step repeats the step's observation."""
        state = reset(simulator)
        state, observation, _ = simulator.step(state, ACTION, AmbientSample(START, 283.15))
        assert simulator.observe(state) == observation

    def test_observation_vector(self, simulator: Simulator) -> None:
        """Test the fixed ordering of observation vectors."""
        state = reset(simulator)
        _, observation, _ = simulator.step(state, ACTION, AmbientSample(START, 283.15))

        names = simulator.observation_names
        vector = observation.to_vector(names)
        assert names[:2] == ["zone_air_temperature:A", "zone_air_temperature:B"]
        assert vector.shape == (len(names),)
        assert vector[names.index("outside_air_temperature")] == 283.15

    def test_ambient_for_wrong_step(self, simulator: Simulator) -> None:
        """Test that the ambient sample must be for the current step."""
        state = reset(simulator)
        with pytest.raises(SeriesGap):
            simulator.step(state, ACTION, AmbientSample(START + STEP, 283.15))

    def test_actuator_limits(self, simulator: Simulator) -> None:
        """Test that out-of-range setpoints are rejected."""
        state = reset(simulator)
        with pytest.raises(ActuatorLimitViolation):
            simulator.step(state, Action(400.0, 291.15), AmbientSample(START, 283.15))

    def test_cooling_call_cools(self, simulator: Simulator) -> None:
        """Test that a warm zone cools under a cool supply."""
        state = reset(simulator)
        _, observation, _ = simulator.step(
            state, Action(333.15, 285.15), AmbientSample(START, 298.0)
        )
        assert observation.zone_temperatures["B"] < 298.0
        assert state.demands["B"].value == "cooling"

    def test_heating_uses_gas(self, simulator: Simulator) -> None:
        """Test that a cold zone triggers boiler fuel."""
        initial = simulator.initial_observation(START, {"A": 290.0, "B": 295.0}, 273.15)
        state = simulator.reset(initial)
        state, observation, _ = simulator.step(state, ACTION, AmbientSample(START, 273.15))

        assert state.last_meter_delta.natural_gas > 0.0
        assert observation.zone_temperatures["A"] > 290.0


class TestReplay:
    """Test replay."""

    def test_deterministic(self, simulator: Simulator) -> None:
        """Test that the same seed gives identical trajectories."""
        actions = constant_series(START, 24, ACTION)
        ambient = constant_series(START, 24, 283.15)

        first = replay(simulator, reset(simulator, seed=5), actions, ambient, 24)
        second = replay(simulator, reset(simulator, seed=5), actions, ambient, 24)

        names = simulator.observation_names
        for a, b in zip(first.observations, second.observations):
            assert np.array_equal(a.to_vector(names), b.to_vector(names))
        assert np.array_equal(
            first.final_state.grids["1"].temperature, second.final_state.grids["1"].temperature
        )

    def test_one_step_equals_step(self, simulator: Simulator) -> None:
        """Test that replaying one step matches a direct step."""
        state = reset(simulator)
        trajectory = replay(simulator, state, {START: ACTION}, {START: 283.15}, 1)
        _, observation, reward = simulator.step(state.copy(), ACTION, AmbientSample(START, 283.15))

        assert trajectory.observations[0] == observation
        assert trajectory.transitions[0].reward == reward

    def test_input_state_untouched(self, simulator: Simulator) -> None:
        """Test that replay works on a copy."""
        state = reset(simulator)
        actions = constant_series(START, 3, ACTION)
        replay(simulator, state, actions, constant_series(START, 3, 283.15), 3)

        assert state.timestamp == START
        assert state.zone_temperatures() == {"A": 294.0, "B": 298.0}

    def test_missing_action(self, simulator: Simulator) -> None:
        """Test that a schedule shorter than the run is a gap."""
        with pytest.raises(SeriesGap, match="setpoints"):
            replay(
                simulator,
                reset(simulator),
                constant_series(START, 2, ACTION),
                constant_series(START, 5, 283.15),
                5,
            )

    def test_missing_ambient(self, simulator: Simulator) -> None:
        """Test that ambient must cover every step."""
        with pytest.raises(SeriesGap, match="ambient"):
            replay(
                simulator,
                reset(simulator),
                constant_series(START, 5, ACTION),
                constant_series(START, 2, 283.15),
                5,
            )

    def test_misaligned_series(self, simulator: Simulator) -> None:
        """Test that series timestamps must be on the lattice."""
        actions = {START: ACTION, START + timedelta(minutes=7): ACTION}
        with pytest.raises(MisalignedTimestamp):
            replay(simulator, reset(simulator), actions, {START: 283.15}, 1)

    def test_meters_sum_of_deltas(self, simulator: Simulator) -> None:
        """Test that cumulative meters equal the summed step deltas."""
        trajectory = replay(
            simulator,
            reset(simulator),
            constant_series(START, 36, ACTION),
            constant_series(START, 36, 278.15),
            36,
        )

        final = trajectory.final_state.meters
        deltas = [t.meter_delta for t in trajectory.transitions]
        assert final.electricity == pytest.approx(sum(d.electricity for d in deltas))
        assert final.natural_gas == pytest.approx(sum(d.natural_gas for d in deltas))
        assert final.carbon == pytest.approx(sum(d.carbon for d in deltas))
        assert all(t.reward.total <= 0.0 for t in trajectory.transitions)
        assert trajectory.observations[-1].meters == final


def office_floor(floor_id: str, west: str, east: str, size: int = 59) -> str:
    """Square floor with an outside ring, an exterior wall and one partition."""
    left = (size - 5) // 2
    right = size - 5 - left
    rows = ["O" * size, "O" + "X" * (size - 2) + "O"]
    rows += ["OX" + west * left + "x" + east * right + "XO"] * (size - 4)
    rows += ["O" + "X" * (size - 2) + "O", "O" * size]
    return f"floor {floor_id} dx_m 1.0 height_m 3.0\n" + "\n".join(rows) + "\n"


@pytest.mark.slow  # type: ignore[misc]
class TestStepPerformance:
    """Wall-clock cost of one step on an office-sized building."""

    DEVICES = """\
device vav-a type vav zone A diffuser 10,10;40,20
device vav-b type vav zone B diffuser 10,40;40,50
device vav-c type vav zone C diffuser 10,10;40,20
device vav-d type vav zone D diffuser 10,40;40,50
device ahu-1 type ahu
device boiler-1 type boiler
device chiller-1 type chiller
"""

    def test_two_floor_step_budget(self) -> None:
        """Test that one step of a two-floor, 6.5k-cell building takes at most 1.5 s."""
        floors = [
            parse_floorplan(office_floor("1", "A", "B"), "floor1.txt"),
            parse_floorplan(office_floor("2", "C", "D"), "floor2.txt"),
        ]
        config = make_building_config(
            floors,
            parse_devices(self.DEVICES, source="devices.txt"),
            parameters=PhysicalParameters(800.0, 0.01, 2748.0, 2500.0, 780.0, 0.5, 500.0, 1.0),
        )
        simulator = assemble(config)

        initial = simulator.initial_observation(
            START, {"A": 292.0, "B": 294.0, "C": 296.0, "D": 298.0}, 283.15
        )
        state = simulator.reset(initial)
        cells = sum(grid.temperature.size - 4 * 58 for grid in state.grids.values())
        assert 6400 <= cells <= 6600
        state, _, _ = simulator.step(state, ACTION, AmbientSample(START, 283.15))

        started = time.perf_counter()
        simulator.step(state, ACTION, AmbientSample(START + STEP, 283.15))
        assert time.perf_counter() - started <= 1.5
