"""Bounded black-box search over the physical parameters.

Every candidate is scored by the N-step spatial MAE on a tuning interval of
telemetry. Candidates are independent simulator runs, so batches are fanned
out to a joblib worker pool; results come back in submission order and the
argmin takes the lowest index on ties, so the outcome does not depend on the
number of workers.

Calibration spec file format::

    # parameters to search; omitted ones keep the manifest value
    param exterior_wall_conductivity 0.01 1.0
    param shuffle_probability 0 1
    budget 100
    seed 0
    strategy quasirandom
    objective_interval 2024-01-01T00:00:00 72
    validation_interval 2024-01-02T00:00:00 72
"""

import logging
import math
import time
import warnings
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
import psutil  # type: ignore[import-untyped]
from dateutil import parser as date_parser  # type: ignore[import-untyped]
from joblib import Parallel, delayed  # type: ignore[import-untyped]
from scipy.optimize import minimize  # type: ignore[import-untyped]
from scipy.stats import qmc  # type: ignore[import-untyped]

from sbsim.building.config import PARAMETER_BOUNDS, BuildingConfig, PhysicalParameters
from sbsim.calib.evaluation import n_step_eval
from sbsim.calib.telemetry import TelemetrySeries
from sbsim.core.errors import CalibrationSpecInvalid
from sbsim.engine.simulator import STEP, check_lattice

logger = logging.getLogger(__name__)

STRATEGIES = ("quasirandom", "coordinate-descent", "nelder-mead-boxed")

DEFAULT_BUDGET = 100
DEFAULT_OBJECTIVE_N = 72

# Stand-in for +inf inside the simplex, which cannot order infinities.
FAILED_OBJECTIVE = 1e12

COMPASS_INITIAL_STEP = 0.25
COMPASS_MIN_STEP = 1e-3


@dataclass(frozen=True)
class EvaluationInterval:
    """``n`` consecutive telemetry records starting at ``start``."""

    start: datetime
    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise CalibrationSpecInvalid(f"Interval length must be at least 1, got {self.n}")

    @property
    def end(self) -> datetime:
        """Timestamp of the last record."""
        return self.start + (self.n - 1) * STEP

    def overlaps(self, other: "EvaluationInterval") -> bool:
        return self.start <= other.end and other.start <= self.end

    def to_dict(self) -> dict[str, Any]:
        return {"start": self.start.isoformat(), "n": self.n}


@dataclass(frozen=True)
class CalibrationSpec:
    """What to search, how, and on which data.

    Attributes:
        bounds: Parameter name -> (min, max); all parameters when empty
        budget: Number of candidate evaluations
        seed: Seed of the quasirandom sequence
        strategy: One of :data:`STRATEGIES`
        objective: Tuning interval (first ``DEFAULT_OBJECTIVE_N`` records when None)
        validation: Held-out intervals for the before/after comparison
    """

    bounds: dict[str, tuple[float, float]] = field(default_factory=dict)
    budget: int = DEFAULT_BUDGET
    seed: int = 0
    strategy: str = "quasirandom"
    objective: Optional[EvaluationInterval] = None
    validation: tuple[EvaluationInterval, ...] = ()

    def __post_init__(self) -> None:
        if not self.bounds:
            object.__setattr__(self, "bounds", dict(PARAMETER_BOUNDS))
        for name, (low, high) in self.bounds.items():
            if name not in PARAMETER_BOUNDS:
                raise CalibrationSpecInvalid(f"Unknown parameter {name!r}")
            if not (math.isfinite(low) and math.isfinite(high)) or low >= high:
                raise CalibrationSpecInvalid(f"Bounds for {name} must be finite with min < max")
            box_low, box_high = PARAMETER_BOUNDS[name]
            if low < box_low or high > box_high:
                raise CalibrationSpecInvalid(
                    f"Bounds for {name} [{low}, {high}] exceed [{box_low}, {box_high}]"
                )
        if self.budget < 1:
            raise CalibrationSpecInvalid(f"Budget must be at least 1, got {self.budget}")
        if self.seed < 0:
            raise CalibrationSpecInvalid(f"Seed must be non-negative, got {self.seed}")
        if self.strategy not in STRATEGIES:
            raise CalibrationSpecInvalid(
                f"Unknown strategy {self.strategy!r} (choose from {', '.join(STRATEGIES)})"
            )
        intervals = ([self.objective] if self.objective is not None else []) + list(
            self.validation
        )
        for i, first in enumerate(intervals):
            for second in intervals[i + 1 :]:
                if first.overlaps(second):
                    raise CalibrationSpecInvalid(
                        f"Intervals starting {first.start.isoformat()} and "
                        f"{second.start.isoformat()} overlap"
                    )

    @property
    def names(self) -> list[str]:
        """Searched parameters in canonical order."""
        return [name for name in PARAMETER_BOUNDS if name in self.bounds]

    @property
    def dimension(self) -> int:
        return len(self.names)

    def to_parameters(self, unit: Sequence[float], base: PhysicalParameters) -> PhysicalParameters:
        """Map a point of the unit cube into the box; unsearched names keep ``base``."""
        values = base.to_dict()
        for name, u in zip(self.names, unit):
            low, high = self.bounds[name]
            values[name] = min(max(low + float(u) * (high - low), low), high)
        return PhysicalParameters(**values)

    def midpoint(self, base: PhysicalParameters) -> PhysicalParameters:
        return self.to_parameters([0.5] * self.dimension, base)

    def objective_interval(self, telemetry: TelemetrySeries) -> EvaluationInterval:
        if self.objective is not None:
            return self.objective
        return EvaluationInterval(telemetry.start, min(DEFAULT_OBJECTIVE_N, len(telemetry)))


def parse_calibration_spec(text: str, source: Optional[str] = None) -> CalibrationSpec:
    """Parse the line-oriented calibration spec format.

    Blank lines and ``#`` comments are ignored.

    Raises:
        CalibrationSpecInvalid: With the offending line number
    """
    bounds: dict[str, tuple[float, float]] = {}
    options: dict[str, Any] = {}
    validation: list[EvaluationInterval] = []

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        keyword, *args = line.split()
        try:
            if keyword == "param":
                if len(args) != 3:
                    raise ValueError("expected: param <name> <min> <max>")
                name = args[0]
                if name not in PARAMETER_BOUNDS:
                    raise ValueError(f"unknown parameter {name!r}")
                if name in bounds:
                    raise ValueError(f"parameter {name} given twice")
                bounds[name] = (float(args[1]), float(args[2]))
            elif keyword in ("budget", "seed"):
                if len(args) != 1:
                    raise ValueError(f"expected: {keyword} <integer>")
                options[keyword] = int(args[0])
            elif keyword == "strategy":
                if len(args) != 1:
                    raise ValueError("expected: strategy <name>")
                options["strategy"] = args[0]
            elif keyword in ("objective_interval", "validation_interval"):
                if len(args) != 2:
                    raise ValueError(f"expected: {keyword} <iso-timestamp> <N>")
                start = date_parser.isoparse(args[0])
                check_lattice(start)
                interval = EvaluationInterval(start, int(args[1]))
                if keyword == "validation_interval":
                    validation.append(interval)
                elif "objective" in options:
                    raise ValueError("objective_interval given twice")
                else:
                    options["objective"] = interval
            else:
                raise ValueError(f"unknown keyword {keyword!r}")
        except CalibrationSpecInvalid as e:
            raise CalibrationSpecInvalid(e.message, source, line_no)
        except ValueError as e:
            raise CalibrationSpecInvalid(str(e), source, line_no)

    try:
        return CalibrationSpec(bounds=bounds, validation=tuple(validation), **options)
    except CalibrationSpecInvalid as e:
        raise CalibrationSpecInvalid(e.message, source)


def load_calibration_spec(path: Union[str, Path]) -> CalibrationSpec:
    """Read a calibration spec file.

    Raises:
        CalibrationSpecInvalid: If the file is missing or malformed
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise CalibrationSpecInvalid(f"Cannot read calibration spec: {e.strerror}", path)
    return parse_calibration_spec(text, str(path))


@dataclass(frozen=True)
class CandidateEvaluation:
    """One entry of the evaluation log."""

    index: int
    parameters: PhysicalParameters
    objective: float

    @property
    def failed(self) -> bool:
        return not math.isfinite(self.objective)


@dataclass
class CalibrationResult:
    """Outcome of a calibration run.

    Attributes:
        best_parameters: Argmin of the log (the first candidate if all failed)
        best_objective: Lowest objective in the log
        best_index: Log index of the best candidate
        evaluations: Every candidate in evaluation order
        strategy: Search strategy used
        interval: Tuning interval
        degenerate: True if every candidate failed
        elapsed_seconds: Wall-clock duration
        cpu_seconds: CPU time of this process and its reaped workers
    """

    best_parameters: PhysicalParameters
    best_objective: float
    best_index: int
    evaluations: list[CandidateEvaluation]
    strategy: str
    interval: EvaluationInterval
    degenerate: bool = False
    elapsed_seconds: float = 0.0
    cpu_seconds: float = 0.0

    @property
    def evaluations_per_second(self) -> float:
        if self.elapsed_seconds <= 0:
            return 0.0
        return len(self.evaluations) / self.elapsed_seconds

    def running_best(self) -> list[float]:
        """Best objective seen after each evaluation."""
        best = math.inf
        trace = []
        for evaluation in self.evaluations:
            best = min(best, evaluation.objective)
            trace.append(best)
        return trace


def _evaluate_candidate(
    config: BuildingConfig, parameters: PhysicalParameters, window: TelemetrySeries
) -> float:
    """Objective of one candidate; diverged runs score inf."""
    report = n_step_eval(config, parameters, window, len(window))
    return report.mae


def _argmin(evaluations: Sequence[CandidateEvaluation]) -> CandidateEvaluation:
    best = evaluations[0]
    for evaluation in evaluations[1:]:
        if evaluation.objective < best.objective:
            best = evaluation
    return best


def _cpu_seconds() -> float:
    times = psutil.Process().cpu_times()
    return float(
        times.user
        + times.system
        + getattr(times, "children_user", 0.0)
        + getattr(times, "children_system", 0.0)
    )


def _sobol_points(dimension: int, count: int, seed: int, skip: int = 0) -> np.ndarray:
    """Scrambled Sobol points in the unit cube."""
    with warnings.catch_warnings():
        # balance warnings for counts that are not powers of two
        warnings.simplefilter("ignore")
        sampler = qmc.Sobol(d=dimension, scramble=True, seed=seed)
        if skip:
            sampler.fast_forward(skip)
        return sampler.random(count)


class _Search:
    """Shared bookkeeping for the strategies: the log and the worker pool."""

    def __init__(
        self,
        config: BuildingConfig,
        spec: CalibrationSpec,
        window: TelemetrySeries,
        jobs: int,
        progress: Optional[Callable[[CandidateEvaluation], None]],
    ):
        self.config = config
        self.spec = spec
        self.window = window
        self.jobs = jobs
        self.progress = progress
        self.base = config.parameters
        self.log: list[CandidateEvaluation] = []
        self.best = math.inf

    @property
    def remaining(self) -> int:
        return self.spec.budget - len(self.log)

    def evaluate(self, units: Sequence[Sequence[float]]) -> list[float]:
        """Score a batch of unit-cube points, truncated to the remaining budget."""
        units = list(units)[: self.remaining]
        if not units:
            return []
        candidates = [self.spec.to_parameters(u, self.base) for u in units]
        if self.jobs == 1 or len(candidates) == 1:
            objectives = [_evaluate_candidate(self.config, c, self.window) for c in candidates]
        else:
            objectives = Parallel(n_jobs=self.jobs)(
                delayed(_evaluate_candidate)(self.config, c, self.window) for c in candidates
            )
        for candidate, objective in zip(candidates, objectives):
            evaluation = CandidateEvaluation(len(self.log), candidate, float(objective))
            self.log.append(evaluation)
            if evaluation.objective < self.best:
                self.best = evaluation.objective
                logger.info(f"Candidate {evaluation.index}: new best MAE {self.best:.4f} K")
            else:
                logger.debug(f"Candidate {evaluation.index}: MAE {evaluation.objective:.4f} K")
            if self.progress is not None:
                self.progress(evaluation)
        return [float(o) for o in objectives]

    def quasirandom(self) -> None:
        self.evaluate(_sobol_points(self.spec.dimension, self.spec.budget, self.spec.seed))

    def coordinate_descent(self) -> None:
        """Compass search in the unit cube, restarted from Sobol points when it stalls."""
        d = self.spec.dimension
        restarts = 0
        centre = np.full(d, 0.5)
        while self.remaining > 0:
            (value,) = self.evaluate([centre])
            step = COMPASS_INITIAL_STEP
            while self.remaining > 0 and step >= COMPASS_MIN_STEP:
                polls = []
                for i in range(d):
                    for sign in (1.0, -1.0):
                        point = centre.copy()
                        point[i] = min(max(point[i] + sign * step, 0.0), 1.0)
                        if point[i] != centre[i]:
                            polls.append(point)
                values = self.evaluate(polls)
                improved = [k for k, v in enumerate(values) if v < value]
                if improved:
                    k = min(improved, key=lambda j: (values[j], j))
                    centre, value = polls[k], values[k]
                else:
                    step /= 2.0
            restarts += 1
            centre = _sobol_points(d, 1, self.spec.seed, skip=restarts)[0]

    def nelder_mead(self) -> None:
        """Boxed simplex search, restarted from Sobol points until the budget is spent."""
        d = self.spec.dimension

        class _BudgetExhausted(Exception):
            pass

        def objective(x: np.ndarray) -> float:
            if self.remaining <= 0:
                raise _BudgetExhausted
            (value,) = self.evaluate([np.clip(x, 0.0, 1.0)])
            return value if math.isfinite(value) else FAILED_OBJECTIVE

        restarts = 0
        x0 = np.full(d, 0.5)
        while self.remaining > 0:
            try:
                minimize(
                    objective,
                    x0,
                    method="Nelder-Mead",
                    bounds=[(0.0, 1.0)] * d,
                    options={"maxfev": self.remaining, "xatol": 1e-4, "fatol": 1e-6},
                )
            except _BudgetExhausted:
                break
            restarts += 1
            x0 = _sobol_points(d, 1, self.spec.seed, skip=restarts)[0]


def calibrate(
    config: BuildingConfig,
    spec: CalibrationSpec,
    telemetry: TelemetrySeries,
    jobs: int = 1,
    progress: Optional[Callable[[CandidateEvaluation], None]] = None,
) -> CalibrationResult:
    """Search the parameter box for the lowest N-step MAE.

    Args:
        config: Building configuration (its parameters fill unsearched names)
        spec: Calibration spec
        telemetry: Recorded series covering the tuning interval
        jobs: Worker processes for candidate batches
        progress: Called once per evaluated candidate, in log order

    Returns:
        CalibrationResult with exactly ``spec.budget`` log entries

    Raises:
        SeriesGap: If the telemetry does not cover the tuning interval
    """
    if jobs < 1:
        raise ValueError(f"jobs must be at least 1, got {jobs}")
    interval = spec.objective_interval(telemetry)
    window = telemetry.window(interval.start, interval.n)
    logger.info(
        f"Calibrating {spec.dimension} parameter(s) with {spec.strategy}, "
        f"budget {spec.budget}, N={interval.n}, jobs={jobs}"
    )

    search = _Search(config, spec, window, jobs, progress)
    started = time.perf_counter()
    cpu_started = _cpu_seconds()
    if spec.strategy == "quasirandom":
        search.quasirandom()
    elif spec.strategy == "coordinate-descent":
        search.coordinate_descent()
    else:
        search.nelder_mead()
    elapsed = time.perf_counter() - started

    best = _argmin(search.log)
    degenerate = all(e.failed for e in search.log)
    if degenerate:
        logger.warning(f"All {len(search.log)} candidates failed")
    else:
        logger.info(f"Best candidate {best.index}: MAE {best.objective:.4f} K")
    return CalibrationResult(
        best_parameters=best.parameters,
        best_objective=best.objective,
        best_index=best.index,
        evaluations=search.log,
        strategy=spec.strategy,
        interval=interval,
        degenerate=degenerate,
        elapsed_seconds=elapsed,
        cpu_seconds=_cpu_seconds() - cpu_started,
    )


def compare_parameters(
    config: BuildingConfig,
    spec: CalibrationSpec,
    telemetry: TelemetrySeries,
    calibrated: PhysicalParameters,
) -> dict[str, Any]:
    """Fidelity of the box midpoint and the calibrated parameters on every interval.

    Returns:
        JSON-friendly mapping with one entry per interval (tuning first)
    """
    midpoint = spec.midpoint(config.parameters)
    intervals = [("tuning", spec.objective_interval(telemetry))]
    intervals += [(f"validation_{i}", v) for i, v in enumerate(spec.validation, start=1)]

    rows = []
    for label, interval in intervals:
        window = telemetry.window(interval.start, interval.n)
        before = n_step_eval(config, midpoint, window, interval.n)
        after = n_step_eval(config, calibrated, window, interval.n)
        rows.append(
            {
                "interval": label,
                **interval.to_dict(),
                "midpoint_mae": before.mae,
                "midpoint_median": before.median,
                "calibrated_mae": after.mae,
                "calibrated_median": after.median,
            }
        )
    return {
        "midpoint_parameters": midpoint.to_dict(),
        "calibrated_parameters": calibrated.to_dict(),
        "intervals": rows,
    }
