"""Tests for calibration specs and the parameter search."""

from datetime import datetime
from pathlib import Path

import pytest  # type: ignore[import-not-found]

from sbsim.building.config import PARAMETER_BOUNDS, BuildingConfig
from sbsim.calib.search import (
    STRATEGIES,
    CalibrationResult,
    CalibrationSpec,
    EvaluationInterval,
    calibrate,
    compare_parameters,
    load_calibration_spec,
    parse_calibration_spec,
)
from sbsim.calib.synthetic import SyntheticScenario, generate_telemetry
from sbsim.calib.telemetry import TelemetrySeries
from sbsim.core.errors import CalibrationSpecInvalid, SeriesGap

START = datetime(2024, 1, 1, 0, 0)

BOUNDS = {
    "exterior_convection_coefficient": (5.0, 800.0),
    "exterior_wall_conductivity": (0.01, 1.0),
}


@pytest.fixture  # type: ignore[misc]
def telemetry(small_config: BuildingConfig) -> TelemetrySeries:
    """Twelve records generated with known parameters."""
    hidden = small_config.parameters.updated(
        {"exterior_convection_coefficient": 100.0, "exterior_wall_conductivity": 0.2}
    )
    return generate_telemetry(
        small_config,
        SyntheticScenario(
            start=START, records=12, initial_zone_temperatures={"A": 292.0, "B": 297.0}
        ),
        hidden,
    )


def spec(strategy: str = "quasirandom", budget: int = 6, seed: int = 0) -> CalibrationSpec:
    return CalibrationSpec(
        bounds=dict(BOUNDS),
        budget=budget,
        seed=seed,
        strategy=strategy,
        objective=EvaluationInterval(START, 6),
        validation=(EvaluationInterval(datetime(2024, 1, 1, 0, 30), 6),),
    )


class TestParseCalibrationSpec:
    """Test parse_calibration_spec."""

    def test_parse(self) -> None:
        """Test every keyword."""
        parsed = parse_calibration_spec(
            "# search the envelope\n"
            "param exterior_wall_conductivity 0.01 1.0\n"
            "param shuffle_probability 0 1\n"
            "budget 40\n"
            "seed 3\n"
            "strategy nelder-mead-boxed\n"
            "objective_interval 2024-01-01T00:00:00 72\n"
            "validation_interval 2024-01-01T06:00:00 72\n"
        )

        assert parsed.names == ["exterior_wall_conductivity", "shuffle_probability"]
        assert parsed.bounds["shuffle_probability"] == (0.0, 1.0)
        assert (parsed.budget, parsed.seed, parsed.strategy) == (40, 3, "nelder-mead-boxed")
        assert parsed.objective == EvaluationInterval(START, 72)
        assert parsed.validation[0].start == datetime(2024, 1, 1, 6)

    def test_defaults(self) -> None:
        """Test that an empty spec searches every parameter."""
        parsed = parse_calibration_spec("")
        assert parsed.names == list(PARAMETER_BOUNDS)
        assert parsed.budget == 100
        assert parsed.strategy == "quasirandom"
        assert parsed.objective is None

    def test_unknown_keyword_line(self) -> None:
        """Test that errors carry their line."""
        with pytest.raises(CalibrationSpecInvalid) as exc:
            parse_calibration_spec("budget 10\n\niterations 5\n", "cal.txt")
        assert exc.value.line == 3
        assert exc.value.exit_code == 2
        assert str(exc.value).startswith("cal.txt:3:")

    def test_unknown_parameter(self) -> None:
        """Test that parameter names are checked."""
        with pytest.raises(CalibrationSpecInvalid) as exc:
            parse_calibration_spec("param roof_albedo 0 1\n")
        assert exc.value.line == 1

    def test_bounds_outside_box(self) -> None:
        """Test that search bounds must sit inside the parameter box."""
        with pytest.raises(CalibrationSpecInvalid) as exc:
            parse_calibration_spec("param shuffle_probability 0 2\n")
        assert exc.value.line == 1

    def test_inverted_bounds(self) -> None:
        """Test that min must be below max."""
        with pytest.raises(CalibrationSpecInvalid):
            parse_calibration_spec("param shuffle_probability 0.8 0.2\n")

    def test_zero_budget(self) -> None:
        """Test that the budget must be positive."""
        with pytest.raises(CalibrationSpecInvalid):
            parse_calibration_spec("budget 0\n")

    def test_unknown_strategy(self) -> None:
        """Test strategy names."""
        with pytest.raises(CalibrationSpecInvalid):
            parse_calibration_spec("strategy annealing\n")

    def test_misaligned_interval(self) -> None:
        """Test that intervals start on the lattice."""
        with pytest.raises(CalibrationSpecInvalid) as exc:
            parse_calibration_spec("budget 5\nobjective_interval 2024-01-01T00:02:00 72\n")
        assert exc.value.line == 2

    def test_overlapping_intervals(self) -> None:
        """Test that tuning and validation data must not overlap."""
        with pytest.raises(CalibrationSpecInvalid, match="overlap"):
            parse_calibration_spec(
                "objective_interval 2024-01-01T00:00:00 72\n"
                "validation_interval 2024-01-01T05:55:00 72\n"
            )

    def test_adjacent_intervals(self) -> None:
        """Test that back-to-back intervals are allowed."""
        parsed = parse_calibration_spec(
            "objective_interval 2024-01-01T00:00:00 72\n"
            "validation_interval 2024-01-01T06:00:00 72\n"
        )
        assert len(parsed.validation) == 1

    def test_load_sample(self, samples_dir: Path) -> None:
        """Test the sample calibration spec."""
        loaded = load_calibration_spec(samples_dir / "calibration.txt")
        assert loaded.budget == 100
        assert loaded.dimension == 4

    def test_load_missing(self, temp_dir: Path) -> None:
        """Test that a missing spec file is a config error."""
        with pytest.raises(CalibrationSpecInvalid):
            load_calibration_spec(temp_dir / "absent.txt")


class TestCalibrationSpec:
    """Test CalibrationSpec mapping helpers."""

    def test_to_parameters(self, small_config: BuildingConfig) -> None:
        """Test the unit cube to box mapping."""
        params = spec().to_parameters([0.0, 1.0], small_config.parameters)
        assert params.exterior_convection_coefficient == 5.0
        assert params.exterior_wall_conductivity == 1.0
        assert params.shuffle_probability == small_config.parameters.shuffle_probability

    def test_midpoint(self, small_config: BuildingConfig) -> None:
        """Test the box midpoint."""
        params = spec().midpoint(small_config.parameters)
        assert params.exterior_convection_coefficient == 402.5

    def test_default_objective_interval(self, telemetry: TelemetrySeries) -> None:
        """Test that the tuning interval defaults to the start of the data."""
        interval = CalibrationSpec().objective_interval(telemetry)
        assert interval == EvaluationInterval(START, 12)


class TestCalibrate:
    """Test calibrate."""

    @pytest.mark.parametrize("strategy", STRATEGIES)  # type: ignore[misc]
    def test_log_length_equals_budget(
        self, small_config: BuildingConfig, telemetry: TelemetrySeries, strategy: str
    ) -> None:
        """Test that every strategy spends exactly its budget."""
        result = calibrate(small_config, spec(strategy, budget=7), telemetry)

        assert len(result.evaluations) == 7
        assert [e.index for e in result.evaluations] == list(range(7))
        assert result.strategy == strategy
        assert not result.degenerate

    @pytest.mark.parametrize("strategy", STRATEGIES)  # type: ignore[misc]
    def test_candidates_inside_bounds(
        self, small_config: BuildingConfig, telemetry: TelemetrySeries, strategy: str
    ) -> None:
        """Test that no candidate leaves the search box."""
        result = calibrate(small_config, spec(strategy, budget=7), telemetry)
        for evaluation in result.evaluations:
            values = evaluation.parameters.to_dict()
            for name, (low, high) in BOUNDS.items():
                assert low <= values[name] <= high
            assert values["shuffle_probability"] == small_config.parameters.shuffle_probability

    def test_budget_one(self, small_config: BuildingConfig, telemetry: TelemetrySeries) -> None:
        """Test that a single evaluation is its own best."""
        result = calibrate(small_config, spec(budget=1), telemetry)
        assert len(result.evaluations) == 1
        assert result.best_index == 0
        assert result.best_parameters == result.evaluations[0].parameters

    def test_best_is_argmin(self, small_config: BuildingConfig, telemetry: TelemetrySeries) -> None:
        """Test the argmin and the running best."""
        result = calibrate(small_config, spec(budget=6), telemetry)
        objectives = [e.objective for e in result.evaluations]

        assert result.best_objective == min(objectives)
        assert result.best_index == objectives.index(min(objectives))
        trace = result.running_best()
        assert all(a >= b for a, b in zip(trace, trace[1:]))
        assert trace[-1] == result.best_objective

    def test_deterministic(self, small_config: BuildingConfig, telemetry: TelemetrySeries) -> None:
        """Test that the same seed gives the same log."""
        first = calibrate(small_config, spec(budget=5, seed=4), telemetry)
        second = calibrate(small_config, spec(budget=5, seed=4), telemetry)
        assert log(first) == log(second)

    def test_seed_changes_candidates(
        self, small_config: BuildingConfig, telemetry: TelemetrySeries
    ) -> None:
        """Test that the seed drives the quasirandom sequence."""
        first = calibrate(small_config, spec(budget=3, seed=0), telemetry)
        second = calibrate(small_config, spec(budget=3, seed=1), telemetry)
        assert log(first) != log(second)

    @pytest.mark.slow  # type: ignore[misc]
    def test_jobs_do_not_change_result(
        self, small_config: BuildingConfig, telemetry: TelemetrySeries
    ) -> None:
        """Test that parallel evaluation returns the same log and argmin."""
        serial = calibrate(small_config, spec(budget=6), telemetry, jobs=1)
        parallel = calibrate(small_config, spec(budget=6), telemetry, jobs=2)
        assert log(serial) == log(parallel)
        assert serial.best_index == parallel.best_index

    def test_progress_callback(
        self, small_config: BuildingConfig, telemetry: TelemetrySeries
    ) -> None:
        """Test that progress is reported once per candidate, in order."""
        seen: list[int] = []
        calibrate(small_config, spec(budget=4), telemetry, progress=lambda e: seen.append(e.index))
        assert seen == [0, 1, 2, 3]

    def test_interval_not_covered(
        self, small_config: BuildingConfig, telemetry: TelemetrySeries
    ) -> None:
        """Test that the tuning interval must lie inside the telemetry."""
        uncovered = CalibrationSpec(
            bounds=dict(BOUNDS), budget=2, objective=EvaluationInterval(START, 20)
        )
        with pytest.raises(SeriesGap):
            calibrate(small_config, uncovered, telemetry)

    def test_compare_parameters(
        self, small_config: BuildingConfig, telemetry: TelemetrySeries
    ) -> None:
        """Test the midpoint versus calibrated comparison."""
        result = calibrate(small_config, spec(budget=4), telemetry)
        comparison = compare_parameters(
            small_config, spec(budget=4), telemetry, result.best_parameters
        )

        labels = [row["interval"] for row in comparison["intervals"]]
        assert labels == ["tuning", "validation_1"]
        tuning = comparison["intervals"][0]
        assert tuning["calibrated_mae"] == pytest.approx(result.best_objective)
        assert tuning["n"] == 6
        assert comparison["midpoint_parameters"]["exterior_convection_coefficient"] == 402.5


def log(result: CalibrationResult) -> list[tuple[int, list[float], float]]:
    return [(e.index, e.parameters.to_vector(), e.objective) for e in result.evaluations]
