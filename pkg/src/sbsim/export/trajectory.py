"""Rollout trajectory CSV and meters summary."""

from collections.abc import Mapping
from pathlib import Path
from typing import Any

from sbsim.engine.simulator import Trajectory
from sbsim.export.base import ArtifactWriter, write_csv_atomic, write_json_atomic
from sbsim.physics.hvac import ZoneComfortSpec

JOULES_PER_KWH = 3.6e6

REWARD_FIELDS = [
    "reward",
    "carbon_cost",
    "energy_cost",
    "comfort_cost",
    "step_carbon_kg",
    "step_energy_j",
    "comfort_deviation_k",
]


def trajectory_summary(
    trajectory: Trajectory, comfort: Mapping[str, ZoneComfortSpec]
) -> dict[str, Any]:
    """Totals over a rollout.

    A comfort violation is one zone outside its band at the end of one step.

    Args:
        trajectory: Rollout to summarize
        comfort: Comfort band per zone

    Returns:
        Mapping with energy in kWh, carbon in kg CO2e and the violation count
    """
    meters = trajectory.final_state.meters
    violations = 0
    total_reward = 0.0
    for transition in trajectory.transitions:
        total_reward += transition.reward.total
        for zone, t in transition.observation.zone_temperatures.items():
            if comfort[zone].deviation(t) > 0:
                violations += 1
    return {
        "steps": len(trajectory),
        "start": trajectory.transitions[0].observation.timestamp.isoformat()
        if trajectory.transitions
        else trajectory.final_state.timestamp.isoformat(),
        "end": trajectory.final_state.timestamp.isoformat(),
        "electricity_kwh": meters.electricity / JOULES_PER_KWH,
        "natural_gas_kwh": meters.natural_gas / JOULES_PER_KWH,
        "carbon_kg": meters.carbon,
        "comfort_violations": violations,
        "total_reward": total_reward,
    }


class TrajectoryWriter(ArtifactWriter):
    """Write ``trajectory.csv`` (one row per step) and ``summary.json``."""

    def write(  # type: ignore[override]
        self,
        trajectory: Trajectory,
        observation_names: list[str],
        comfort: Mapping[str, ZoneComfortSpec],
    ) -> list[Path]:
        """Write the rollout.

        Args:
            trajectory: Rollout to write
            observation_names: Observation column order
            comfort: Comfort band per zone, for the violation count

        Returns:
            Paths of the files written
        """
        self.ensure_output_dir()
        fieldnames = ["step", "timestamp", *observation_names, *REWARD_FIELDS]
        rows = []
        for step, transition in enumerate(trajectory.transitions, start=1):
            record = transition.observation.as_record()
            row: dict[str, Any] = {
                "step": step,
                "timestamp": transition.observation.timestamp.isoformat(),
            }
            row.update({name: repr(record[name]) for name in observation_names})
            row.update({k: repr(v) for k, v in transition.reward.as_record().items()})
            rows.append(row)

        csv_path = self.path("trajectory.csv")
        summary_path = self.path("summary.json")
        write_csv_atomic(csv_path, fieldnames, rows)
        write_json_atomic(summary_path, trajectory_summary(trajectory, comfort))
        return [csv_path, summary_path]
