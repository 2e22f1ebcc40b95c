"""Reward: weighted sum of negative carbon, energy and comfort costs."""

from collections.abc import Mapping
from dataclasses import dataclass

from sbsim.physics.hvac import EnergyMeters, ZoneComfortSpec


@dataclass(frozen=True)
class RewardWeights:
    """Unitless weights applied to the normalized costs."""

    carbon: float = 1.0
    energy: float = 1.0
    comfort: float = 10.0

    def __post_init__(self) -> None:
        if min(self.carbon, self.energy, self.comfort) < 0:
            raise ValueError("Reward weights must be non-negative")


@dataclass(frozen=True)
class RewardScales:
    """Reference magnitudes that make each cost unitless.

    Attributes:
        carbon_kg: Carbon per step that counts as one unit of cost
        energy_j: Energy per step that counts as one unit of cost (1 kWh)
        comfort_k: Summed zone deviation per step that counts as one unit
    """

    carbon_kg: float = 1.0
    energy_j: float = 3.6e6
    comfort_k: float = 1.0

    def __post_init__(self) -> None:
        if min(self.carbon_kg, self.energy_j, self.comfort_k) <= 0:
            raise ValueError("Reward scales must be positive")


@dataclass(frozen=True)
class RewardBreakdown:
    """Costs of one step and the resulting reward.

    ``carbon_cost``, ``energy_cost`` and ``comfort_cost`` are normalized by
    the scales; the ``*_raw`` fields keep physical units (kg, J, K).
    """

    carbon_cost: float
    energy_cost: float
    comfort_cost: float
    carbon_raw: float
    energy_raw: float
    comfort_raw: float
    weights: RewardWeights
    total: float

    def as_record(self) -> dict[str, float]:
        return {
            "reward": self.total,
            "carbon_cost": self.carbon_cost,
            "energy_cost": self.energy_cost,
            "comfort_cost": self.comfort_cost,
            "step_carbon_kg": self.carbon_raw,
            "step_energy_j": self.energy_raw,
            "comfort_deviation_k": self.comfort_raw,
        }


def comfort_deviation(
    zone_temperatures: Mapping[str, float], comfort: Mapping[str, ZoneComfortSpec]
) -> float:
    """Summed distance of every zone from its comfort band (K)."""
    return sum(comfort[zone].deviation(t) for zone, t in sorted(zone_temperatures.items()))


def compute_reward(
    meters: EnergyMeters,
    zone_temperatures: Mapping[str, float],
    comfort: Mapping[str, ZoneComfortSpec],
    weights: RewardWeights,
    scales: RewardScales,
) -> RewardBreakdown:
    """Score one step.

    Args:
        meters: Energy and carbon used during the step
        zone_temperatures: Zone means at the end of the step (K)
        comfort: Comfort band per zone
        weights: Cost weights
        scales: Normalizing scales

    Returns:
        RewardBreakdown with ``total = -(w_c*carbon + w_e*energy + w_t*comfort)``
    """
    carbon_raw = max(0.0, meters.carbon)
    energy_raw = max(0.0, meters.total_energy)
    comfort_raw = comfort_deviation(zone_temperatures, comfort)

    carbon_cost = carbon_raw / scales.carbon_kg
    energy_cost = energy_raw / scales.energy_j
    comfort_cost = comfort_raw / scales.comfort_k
    weighted = (
        weights.carbon * carbon_cost + weights.energy * energy_cost + weights.comfort * comfort_cost
    )
    return RewardBreakdown(
        carbon_cost=carbon_cost,
        energy_cost=energy_cost,
        comfort_cost=comfort_cost,
        carbon_raw=carbon_raw,
        energy_raw=energy_raw,
        comfort_raw=comfort_raw,
        weights=weights,
        # avoid -0.0 in exported trajectories
        total=-weighted if weighted > 0 else 0.0,
    )
