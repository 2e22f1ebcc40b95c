"""Tests for the HVAC plant energy balance."""

import math

import pytest  # type: ignore[import-not-found]

from sbsim.core.errors import ActuatorLimitViolation
from sbsim.engine.simulator import Action
from sbsim.physics.hvac import (
    AIR_SPECIFIC_HEAT,
    Demand,
    EmissionFactors,
    EnergyMeters,
    HvacPlant,
    PlantConstants,
    VavDevice,
    ZoneComfortSpec,
    carbon_from_energy,
    mix_air,
    plant_step,
    thermostat_demand,
)

DT = 300.0


@pytest.fixture  # type: ignore[misc]
def comfort() -> ZoneComfortSpec:
    """Default comfort band."""
    return ZoneComfortSpec("A", heating_setpoint=293.15, cooling_setpoint=297.15, deadband=0.5)


@pytest.fixture  # type: ignore[misc]
def plant() -> HvacPlant:
    """One VAV with two diffusers, supply temperatures at their setpoints."""
    vav = VavDevice("vav-a", "A", "1", diffusers=((2, 2), (2, 3)), design_flow=0.5)
    return HvacPlant(
        PlantConstants(), [vav], supply_air_temperature=285.15, supply_water_temperature=333.15
    )


class TestThermostat:
    """Test thermostat_demand."""

    def test_calls_outside_band(self, comfort: ZoneComfortSpec) -> None:
        """Test heating below and cooling above the band."""
        assert thermostat_demand(292.0, comfort) is Demand.HEATING
        assert thermostat_demand(298.0, comfort) is Demand.COOLING
        assert thermostat_demand(295.0, comfort) is Demand.NONE

    def test_heating_hysteresis(self, comfort: ZoneComfortSpec) -> None:
        """Test that a heating call persists through the deadband."""
        assert thermostat_demand(293.5, comfort, Demand.HEATING) is Demand.HEATING
        assert thermostat_demand(293.5, comfort, Demand.NONE) is Demand.NONE
        assert thermostat_demand(293.7, comfort, Demand.HEATING) is Demand.NONE

    def test_cooling_hysteresis(self, comfort: ZoneComfortSpec) -> None:
        """Test that a cooling call persists through the deadband."""
        assert thermostat_demand(296.8, comfort, Demand.COOLING) is Demand.COOLING
        assert thermostat_demand(296.8, comfort, Demand.NONE) is Demand.NONE
        assert thermostat_demand(296.6, comfort, Demand.COOLING) is Demand.NONE

    def test_invalid_band(self) -> None:
        """Test that the deadband must fit inside the band."""
        with pytest.raises(ValueError):
            ZoneComfortSpec("A", heating_setpoint=296.0, cooling_setpoint=296.2, deadband=0.5)

    def test_deviation(self, comfort: ZoneComfortSpec) -> None:
        """Test distance from the comfort band."""
        assert comfort.deviation(295.0) == 0.0
        assert comfort.deviation(299.15) == pytest.approx(2.0)
        assert comfort.deviation(292.15) == pytest.approx(1.0)


class TestAirHandler:
    """Test air mixing and carbon accounting."""

    def test_mix_air(self) -> None:
        """Test the mixed-air temperature."""
        assert mix_air(295.15, 303.15, 0.5) == pytest.approx(299.15)

    def test_mix_air_fraction_bounds(self) -> None:
        """Test that the recirculation fraction is checked."""
        with pytest.raises(ValueError):
            mix_air(295.15, 303.15, 1.5)

    def test_carbon_from_energy(self) -> None:
        """Test carbon of one kWh electricity and two kWh gas."""
        factors = EmissionFactors(electricity_kg_per_j=1.1e-7, gas_kg_per_j=5.0e-8)
        assert carbon_from_energy(3.6e6, 7.2e6, factors) == pytest.approx(0.756)

    def test_meters_add(self) -> None:
        """Test meter accumulation."""
        total = EnergyMeters(1.0, 2.0, 0.5) + EnergyMeters(3.0, 4.0, 0.25)
        assert total == EnergyMeters(4.0, 6.0, 0.75)
        assert total.total_energy == 10.0


class TestPlantStep:
    """Test plant_step."""

    def test_cooling_power_and_chiller(self, plant: HvacPlant) -> None:
        """Test supply power split over diffusers and chiller electricity."""
        power, delta = plant_step(
            plant, {"A": Demand.COOLING}, {"A": 295.15}, Action(333.15, 285.15), 290.0, DT
        )

        assert power[("1", 2, 2)] == pytest.approx(-2515.0)
        assert power[("1", 2, 3)] == pytest.approx(-2515.0)
        constants = plant.constants
        assert plant.chiller.compressor_power == pytest.approx(5030.0 / constants.chiller_cop)
        expected = (
            constants.intake_fan_power
            + constants.exhaust_fan_power
            + 5030.0 / constants.chiller_cop
            + constants.chiller_pump_power
            + constants.boiler_pump_power
        ) * DT
        assert delta.electricity == pytest.approx(expected)
        assert delta.natural_gas == 0.0

    def test_heating_gas_includes_loop_loss(self, plant: HvacPlant) -> None:
        """Test reheat power and boiler fuel."""
        power, delta = plant_step(
            plant, {"A": Demand.HEATING}, {"A": 293.15}, Action(333.15, 285.15), 280.0, DT
        )

        reheat = 0.8 * 0.5 * AIR_SPECIFIC_HEAT * 40.0
        assert sum(power.values()) == pytest.approx(reheat)
        constants = plant.constants
        gas = reheat * (1.0 + constants.loop_loss_fraction) * DT / constants.boiler_efficiency
        assert delta.natural_gas == pytest.approx(gas)
        assert plant.hot_water.pump_power == constants.boiler_pump_power

    def test_no_demand_ventilates_only(self, plant: HvacPlant) -> None:
        """Test that an idle zone gets no power but the fans and pumps run."""
        power, delta = plant_step(
            plant, {"A": Demand.NONE}, {"A": 295.0}, Action(333.15, 285.15), 290.0, DT
        )

        assert all(v == 0.0 for v in power.values())
        assert plant.vav_states[0].damper_fraction == plant.constants.ventilation_damper
        constants = plant.constants
        idle = (
            constants.intake_fan_power
            + constants.exhaust_fan_power
            + constants.boiler_pump_power
            + constants.chiller_pump_power
        )
        assert delta.electricity == pytest.approx(idle * DT)
        assert delta.natural_gas == 0.0
        assert plant.chiller.compressor_power == 0.0

    def test_no_flow_draws_nothing(self) -> None:
        """Test that fans and pumps stop when no air flows."""
        vav = VavDevice("vav-a", "A", "1", diffusers=((2, 2),), design_flow=0.5)
        plant = HvacPlant(PlantConstants(ventilation_damper=0.0), [vav])
        _, delta = plant_step(
            plant, {"A": Demand.NONE}, {"A": 295.0}, Action(333.15, 291.15), 290.0, DT
        )

        assert delta == EnergyMeters()
        assert plant.hot_water.pump_power == 0.0
        assert plant.chiller.coolant_pump_power == 0.0

    def test_meter_delta_accumulates(self, plant: HvacPlant) -> None:
        """Test that the cumulative meters equal the sum of deltas."""
        deltas = []
        for demand, temperature in [
            (Demand.HEATING, 292.0),
            (Demand.NONE, 295.0),
            (Demand.COOLING, 299.0),
        ]:
            _, delta = plant_step(
                plant, {"A": demand}, {"A": temperature}, Action(333.15, 285.15), 285.0, DT
            )
            deltas.append(delta)

        assert plant.meters.electricity == pytest.approx(sum(d.electricity for d in deltas))
        assert plant.meters.natural_gas == pytest.approx(sum(d.natural_gas for d in deltas))
        assert plant.meters.carbon == pytest.approx(sum(d.carbon for d in deltas))

    def test_supply_temperature_lag(self, plant: HvacPlant) -> None:
        """Test first-order tracking of the water setpoint."""
        plant_step(plant, {"A": Demand.NONE}, {"A": 295.0}, Action(343.15, 285.15), 290.0, DT)

        tau = plant.constants.supply_water_time_constant
        expected = 343.15 - 10.0 * math.exp(-DT / tau)
        assert plant.hot_water.supply_water_temperature == pytest.approx(expected)
        assert plant.hot_water.supply_water_setpoint == 343.15

    def test_actuator_limits(self, plant: HvacPlant) -> None:
        """Test that out-of-range setpoints are rejected."""
        with pytest.raises(ActuatorLimitViolation):
            plant_step(plant, {}, {"A": 295.0}, Action(400.0, 291.15), 290.0, DT)
        with pytest.raises(ActuatorLimitViolation):
            plant_step(plant, {}, {"A": 295.0}, Action(333.15, math.nan), 290.0, DT)

    def test_copy_is_independent(self, plant: HvacPlant) -> None:
        """Test that a copied plant does not share meters."""
        clone = plant.copy()
        plant_step(clone, {"A": Demand.COOLING}, {"A": 299.0}, Action(333.15, 285.15), 290.0, DT)
        assert plant.meters == EnergyMeters()
        assert clone.meters.electricity > 0


def delivered_heat(flow: float, effectiveness: float, zone: float, water: float = 333.15) -> float:
    vav = VavDevice(
        "vav-a",
        "A",
        "1",
        diffusers=((2, 2), (2, 3)),
        design_flow=flow,
        reheat_effectiveness=effectiveness,
    )
    plant = HvacPlant(PlantConstants(), [vav], supply_water_temperature=water)
    power, _ = plant_step(
        plant, {"A": Demand.HEATING}, {"A": zone}, Action(water, 291.15), 280.0, DT
    )
    return sum(power.values())


class TestHeatDelivery:
    """Sweep flow, reheat effectiveness and water setpoint under a heating call."""

    FLOWS = [0.05 * k for k in range(21)]
    EFFECTIVENESS = [0.1 * k for k in range(11)]

    @pytest.mark.parametrize("zone", [283.15, 293.15, 305.15, 333.15, 340.0])  # type: ignore[misc]
    def test_more_flow_never_less_heat(self, zone: float) -> None:
        """Test that opening the damper further never lowers delivered heat."""
        for effectiveness in self.EFFECTIVENESS:
            heat = [delivered_heat(flow, effectiveness, zone) for flow in self.FLOWS]
            assert all(b >= a for a, b in zip(heat, heat[1:]))
            assert min(heat) >= 0.0

    @pytest.mark.parametrize("zone", [283.15, 293.15, 305.15, 333.15, 340.0])  # type: ignore[misc]
    def test_more_reheat_never_less_heat(self, zone: float) -> None:
        """Test that opening the reheat valve further never lowers delivered heat."""
        for flow in self.FLOWS:
            heat = [delivered_heat(flow, e, zone) for e in self.EFFECTIVENESS]
            assert all(b >= a for a, b in zip(heat, heat[1:]))

    def test_hotter_water_never_less_heat(self) -> None:
        """Test that a higher supply water setpoint never lowers delivered heat."""
        waters = [310.15 + 5.0 * k for k in range(11)]
        for zone in (288.15, 293.15, 320.15):
            heat = [delivered_heat(0.5, 0.8, zone, water) for water in waters]
            assert all(b >= a for a, b in zip(heat, heat[1:]))

    def test_closed_damper_or_valve_delivers_nothing(self) -> None:
        """Test the endpoints of the sweep."""
        assert delivered_heat(0.0, 0.8, 293.15) == 0.0
        assert delivered_heat(0.5, 0.0, 293.15) == 0.0
        assert delivered_heat(0.5, 0.8, 333.15) == 0.0
