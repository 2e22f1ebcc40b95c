"""Tests for telemetry ingestion."""

from datetime import datetime, timedelta
from pathlib import Path
from typing import Optional

import pandas as pd
import pytest  # type: ignore[import-not-found]

from sbsim.calib.telemetry import (
    COLUMNS,
    TelemetrySeries,
    load_telemetry,
    parse_telemetry,
    write_telemetry,
)
from sbsim.core.errors import (
    DuplicateRecord,
    MisalignedTimestamp,
    MissingZoneReading,
    SeriesGap,
    TelemetryFormatError,
)

START = datetime(2024, 7, 6, 1, 40)


def rows(
    count: int, zones: tuple[str, ...] = ("A", "B"), start: datetime = START
) -> list[list[str]]:
    result = []
    for k in range(count):
        stamp = (start + k * timedelta(minutes=5)).isoformat()
        for i, zone in enumerate(zones):
            result.append([stamp, zone, "zone_air_temperature", str(295.0 + i + 0.1 * k)])
        result.append([stamp, "weather", "outside_air_temperature", "291.0"])
        result.append([stamp, "boiler-1", "supply_water_setpoint", "333.15"])
        result.append([stamp, "ahu-1", "supply_air_setpoint", "291.15"])
    return result


def frame(data: list[list[str]], columns: Optional[list[str]] = None) -> pd.DataFrame:
    return pd.DataFrame(data, columns=columns or COLUMNS)


class TestParseTelemetry:
    """Test parse_telemetry."""

    def test_parse(self) -> None:
        """Test pivoting into records."""
        series = parse_telemetry(frame(rows(3)))

        assert len(series) == 3
        assert series.zone_ids == ("A", "B")
        assert series.start == START
        assert series.end == START + timedelta(minutes=10)
        record = series[1]
        assert record.zone_temperatures == {"A": pytest.approx(295.1), "B": pytest.approx(296.1)}
        assert record.ambient_temperature == 291.0
        assert record.action.supply_water_setpoint == 333.15
        assert record.supply_air_temperature is None

    def test_rows_in_any_order(self) -> None:
        """Test that row order does not matter."""
        series = parse_telemetry(frame(list(reversed(rows(3)))))
        assert series.timestamps == [START + k * timedelta(minutes=5) for k in range(3)]

    def test_observation_falls_back_to_setpoints(self) -> None:
        """Test supply temperatures when only setpoints were recorded."""
        observation = parse_telemetry(frame(rows(1)))[0].to_observation()
        assert observation.supply_water_temperature == 333.15
        assert observation.supply_air_temperature == 291.15

    def test_unknown_fields_ignored(self) -> None:
        """Test that extra fields are dropped."""
        data = rows(2) + [[START.isoformat(), "A", "relative_humidity", "0.4"]]
        assert len(parse_telemetry(frame(data))) == 2

    def test_bad_columns(self) -> None:
        """Test the header check."""
        with pytest.raises(TelemetryFormatError) as exc:
            parse_telemetry(frame(rows(1), ["time", "device", "field", "value"]), "t.csv")
        assert exc.value.line == 1
        assert exc.value.exit_code == 3

    def test_misaligned_timestamp(self) -> None:
        """Test that timestamps must sit on the five minute lattice."""
        data = rows(2)
        data[-1][0] = "2024-07-06T01:48:00"
        with pytest.raises(MisalignedTimestamp) as exc:
            parse_telemetry(frame(data), "t.csv")
        assert exc.value.line == len(data) + 1

    def test_duplicate_record(self) -> None:
        """Test that a repeated reading is rejected."""
        data = rows(2)
        data.append(list(data[0]))
        with pytest.raises(DuplicateRecord) as exc:
            parse_telemetry(frame(data))
        assert exc.value.line == len(data) + 1

    def test_same_field_from_two_devices(self) -> None:
        """Test that one field from different devices is not a duplicate."""
        data = rows(2)
        for stamp in (START, START + timedelta(minutes=5)):
            data.append([stamp.isoformat(), "vav-1", "damper_fraction", "0.2"])
            data.append([stamp.isoformat(), "vav-2", "damper_fraction", "0.4"])
        assert len(parse_telemetry(frame(data))) == 2

    def test_duplicate_unknown_field(self) -> None:
        """Test that a repeated unknown reading is still a duplicate."""
        data = rows(1) + [[START.isoformat(), "vav-1", "damper_fraction", "0.2"]] * 2
        with pytest.raises(DuplicateRecord) as exc:
            parse_telemetry(frame(data))
        assert exc.value.line == len(data) + 1

    def test_unknown_field_value_not_checked(self) -> None:
        """Test that values of ignored fields need not be numeric."""
        data = rows(1) + [[START.isoformat(), "vav-1", "mode", "occupied"]]
        assert len(parse_telemetry(frame(data))) == 1

    def test_building_field_from_two_devices(self) -> None:
        """Test that two ambient readings at one timestamp are rejected."""
        data = rows(1) + [[START.isoformat(), "weather-2", "outside_air_temperature", "290.0"]]
        with pytest.raises(TelemetryFormatError, match="more than one device") as exc:
            parse_telemetry(frame(data))
        assert exc.value.line == len(data) + 1

    def test_gap(self) -> None:
        """Test that a missing step is a gap."""
        data = rows(1) + rows(1, start=START + timedelta(minutes=10))
        with pytest.raises(SeriesGap):
            parse_telemetry(frame(data))

    def test_missing_zone(self) -> None:
        """Test that every zone is needed at every timestamp."""
        data = [row for row in rows(2) if not (row[1] == "B" and row[0] != START.isoformat())]
        with pytest.raises(MissingZoneReading):
            parse_telemetry(frame(data))

    def test_missing_required_field(self) -> None:
        """Test that ambient temperature is required."""
        data = [row for row in rows(2) if row[2] != "outside_air_temperature"]
        with pytest.raises(TelemetryFormatError, match="outside_air_temperature"):
            parse_telemetry(frame(data))

    def test_non_numeric_value(self) -> None:
        """Test that values must be finite numbers."""
        data = rows(1)
        data[0][3] = "warm"
        with pytest.raises(TelemetryFormatError) as exc:
            parse_telemetry(frame(data))
        assert exc.value.line == 2


class TestTelemetrySeries:
    """Test TelemetrySeries windows and lookups."""

    @pytest.fixture  # type: ignore[misc]
    def series(self) -> TelemetrySeries:
        """Ten records."""
        return parse_telemetry(frame(rows(10)))

    def test_window_by_index(self, series: TelemetrySeries) -> None:
        """Test slicing by position."""
        window = series.window(2, 3)
        assert len(window) == 3
        assert window.start == START + timedelta(minutes=10)

    def test_window_by_timestamp(self, series: TelemetrySeries) -> None:
        """Test slicing by timestamp."""
        window = series.window(START + timedelta(minutes=25), 5)
        assert window.end == series.end

    def test_window_too_long(self, series: TelemetrySeries) -> None:
        """Test that a window past the end is a gap."""
        with pytest.raises(SeriesGap):
            series.window(5, 6)

    def test_index_of_uncovered(self, series: TelemetrySeries) -> None:
        """Test lookups outside the series."""
        with pytest.raises(SeriesGap):
            series.index_of(START - timedelta(minutes=5))

    def test_zone_matrix(self, series: TelemetrySeries) -> None:
        """Test the timestamp x zone frame."""
        matrix = series.zone_matrix()
        assert matrix.shape == (10, 2)
        assert list(matrix.columns) == ["A", "B"]


class TestTelemetryFiles:
    """Test reading and writing telemetry CSV files."""

    def test_write_then_load(self, temp_dir: Path) -> None:
        """Test that written telemetry loads back exactly."""
        series = parse_telemetry(frame(rows(4)))
        path = write_telemetry(series, temp_dir / "telemetry.csv")

        loaded = load_telemetry(path)
        assert loaded.records == series.records
        assert path.read_text().splitlines()[0] == ",".join(COLUMNS)

    def test_missing_file(self, temp_dir: Path) -> None:
        """Test that an unreadable file is a data error."""
        with pytest.raises(TelemetryFormatError):
            load_telemetry(temp_dir / "absent.csv")
