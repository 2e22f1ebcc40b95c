"""Turn a validated BuildingConfig into a Simulator."""

import logging

from sbsim.building.config import BuildingConfig
from sbsim.engine.simulator import Simulator
from sbsim.physics.grid import ThermalGrid
from sbsim.physics.hvac import HvacPlant

logger = logging.getLogger(__name__)


def assemble(config: BuildingConfig) -> Simulator:
    """Build one grid per floor and a single shared plant.

    Floors are thermally isolated from each other; cell materials come from
    the config's physical parameters by cell kind.

    Args:
        config: Validated building configuration

    Returns:
        Simulator ready for ``reset``
    """
    params = config.parameters
    materials = params.materials(config.air)
    vavs = config.vavs
    settings = config.simulation

    grids: dict[str, ThermalGrid] = {}
    for floor in config.floors:
        diffusers = [
            cell for vav in vavs if vav.floor_id == floor.floor_id for cell in vav.diffusers
        ]
        grids[floor.floor_id] = floor.to_grid(
            materials,
            convection_coefficient=params.exterior_convection_coefficient,
            shuffle_probability=params.shuffle_probability,
            diffusers=diffusers,
            initial_temperature=settings.initial_zone_temperature,
        )

    plant = HvacPlant(
        config.plant,
        vavs,
        supply_air_temperature=settings.supply_air_setpoint,
        supply_water_temperature=settings.supply_water_setpoint,
    )
    simulator = Simulator(
        grids,
        plant,
        config.comfort,
        reward_weights=config.reward_weights,
        reward_scales=config.reward_scales,
        seed=settings.seed,
    )
    logger.debug(
        f"Assembled {config.name}: floors {', '.join(grids)}; "
        f"{sum(g.rows * g.cols for g in grids.values())} cells"
    )
    return simulator
