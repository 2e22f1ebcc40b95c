"""N-step prediction fidelity of a parameter vector against telemetry."""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

from sbsim.building.assembly import assemble
from sbsim.building.config import BuildingConfig, PhysicalParameters
from sbsim.calib.metrics import spatial_error
from sbsim.calib.telemetry import TelemetrySeries
from sbsim.core.errors import NonFiniteTemperature
from sbsim.engine.simulator import SimulatorState, replay

logger = logging.getLogger(__name__)


@dataclass
class FidelityReport:
    """Outcome of replaying telemetry for N steps.

    Attributes:
        n: Number of telemetry records used (steps 0..N-1)
        mae: Spatial mean absolute error at step N-1 (K), inf if the run diverged
        median: Median absolute zone error at step N-1 (K)
        zone_errors: Zone id -> absolute error at step N-1 (K)
        epsilon: Spatial MAE at every step 0..N-1
        real: Measured zone temperatures per step
        simulated: Simulated zone temperatures per step
        final_state: Simulator state at step N-1 (None if the run diverged)
        failure: Reason the run diverged, if it did
    """

    n: int
    mae: float
    median: float
    zone_errors: dict[str, float]
    epsilon: list[float]
    real: list[dict[str, float]] = field(default_factory=list)
    simulated: list[dict[str, float]] = field(default_factory=list)
    final_state: Optional[SimulatorState] = field(default=None, repr=False, compare=False)
    failure: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.failure is not None

    def summary(self) -> dict[str, object]:
        """JSON-friendly summary."""
        return {
            "n": self.n,
            "mae": self.mae,
            "median": self.median,
            "zone_errors": dict(self.zone_errors),
            "failure": self.failure,
        }


def n_step_eval(
    config: BuildingConfig,
    parameters: Optional[PhysicalParameters],
    telemetry: TelemetrySeries,
    n: int,
    seed: Optional[int] = None,
) -> FidelityReport:
    """Reset from the first record, replay N-1 steps, score at step N-1.

    Step ``k`` replays the setpoints and ambient temperature recorded at
    record ``k``. A run whose temperatures diverge scores ``inf``.

    Args:
        config: Building configuration
        parameters: Parameters to evaluate (the config's own when None)
        telemetry: Recorded series, at least N records long
        n: Number of records to compare
        seed: Shuffle seed (defaults to the config seed)

    Returns:
        FidelityReport

    Raises:
        SeriesGap: If the telemetry is shorter than N
        MissingZoneReading: If telemetry lacks a building zone
        ZoneSetMismatch: If telemetry names zones the building lacks
    """
    if n < 1:
        raise ValueError(f"N must be at least 1, got {n}")
    window = telemetry.window(0, n)
    if parameters is not None:
        config = config.with_parameters(parameters)
    simulator = assemble(config)
    state = simulator.reset(window[0].to_observation(), seed)

    real = [dict(r.zone_temperatures) for r in window.records]
    simulated = [state.zone_temperatures()]
    epsilon = [spatial_error(real[0], simulated[0]).mae]
    try:
        trajectory = replay(simulator, state, window.actions(), window.ambient(), n - 1)
    except NonFiniteTemperature as e:
        logger.debug(f"Diverged: {e}")
        return FidelityReport(
            n=n,
            mae=math.inf,
            median=math.inf,
            zone_errors={zone: math.inf for zone in window.zone_ids},
            epsilon=epsilon,
            real=real,
            simulated=simulated,
            failure=str(e),
        )

    for step, observation in enumerate(trajectory.observations, start=1):
        simulated.append(dict(observation.zone_temperatures))
        epsilon.append(spatial_error(real[step], observation.zone_temperatures).mae)

    final = spatial_error(real[-1], simulated[-1])
    return FidelityReport(
        n=n,
        mae=final.mae,
        median=final.median,
        zone_errors=final.zone_errors,
        epsilon=epsilon,
        real=real,
        simulated=simulated,
        final_state=trajectory.final_state,
    )
