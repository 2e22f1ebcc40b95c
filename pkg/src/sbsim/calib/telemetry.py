"""Telemetry ingestion: long-format CSV to a validated, pivoted series.

The CSV has the header ``timestamp,device_id,field,value``. Zone air
temperatures use the zone id as ``device_id``; the other fields describe the
building as a whole and may use any device id::

    timestamp,device_id,field,value
    2024-07-06T01:40:00,A,zone_air_temperature,296.4
    2024-07-06T01:40:00,weather,outside_air_temperature,291.0
    2024-07-06T01:40:00,boiler-1,supply_water_setpoint,333.15
    2024-07-06T01:40:00,ahu-1,supply_air_setpoint,291.15
"""

import logging
import math
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Optional, Union

import pandas as pd
from dateutil import parser as date_parser  # type: ignore[import-untyped]

from sbsim.core.errors import (
    DuplicateRecord,
    MisalignedTimestamp,
    MissingZoneReading,
    SeriesGap,
    TelemetryFormatError,
)
from sbsim.engine.simulator import STEP, Action, Observation, check_lattice
from sbsim.export.base import write_csv_atomic

logger = logging.getLogger(__name__)

COLUMNS = ["timestamp", "device_id", "field", "value"]

ZONE_FIELD = "zone_air_temperature"
AMBIENT_FIELD = "outside_air_temperature"
WATER_SETPOINT_FIELD = "supply_water_setpoint"
AIR_SETPOINT_FIELD = "supply_air_setpoint"
WATER_TEMPERATURE_FIELD = "supply_water_temperature"
AIR_TEMPERATURE_FIELD = "supply_air_temperature"

REQUIRED_FIELDS = (AMBIENT_FIELD, WATER_SETPOINT_FIELD, AIR_SETPOINT_FIELD)
OPTIONAL_FIELDS = (WATER_TEMPERATURE_FIELD, AIR_TEMPERATURE_FIELD)


@dataclass(frozen=True)
class TelemetryRecord:
    """All readings at one timestamp (K)."""

    timestamp: datetime
    zone_temperatures: dict[str, float]
    ambient_temperature: float
    supply_water_setpoint: float
    supply_air_setpoint: float
    supply_water_temperature: Optional[float] = None
    supply_air_temperature: Optional[float] = None

    @property
    def action(self) -> Action:
        return Action(self.supply_water_setpoint, self.supply_air_setpoint)

    def to_observation(self) -> Observation:
        """Observation used to reset a simulator at this record.

        Supply temperatures fall back to their setpoints when not recorded.
        """
        t_water = (
            self.supply_water_temperature
            if self.supply_water_temperature is not None
            else self.supply_water_setpoint
        )
        t_air = (
            self.supply_air_temperature
            if self.supply_air_temperature is not None
            else self.supply_air_setpoint
        )
        return Observation(
            timestamp=self.timestamp,
            zone_temperatures=dict(self.zone_temperatures),
            ambient_temperature=self.ambient_temperature,
            supply_air_temperature=t_air,
            supply_water_temperature=t_water,
            supply_air_setpoint=self.supply_air_setpoint,
            supply_water_setpoint=self.supply_water_setpoint,
        )


@dataclass(frozen=True)
class TelemetrySeries:
    """Records at consecutive five minute timestamps, each covering every zone."""

    records: tuple[TelemetryRecord, ...]
    zone_ids: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        if not self.records:
            raise TelemetryFormatError("Telemetry series is empty")
        if not self.zone_ids:
            object.__setattr__(self, "zone_ids", tuple(sorted(self.records[0].zone_temperatures)))
        previous: Optional[datetime] = None
        for record in self.records:
            check_lattice(record.timestamp)
            missing = sorted(set(self.zone_ids) - set(record.zone_temperatures))
            if missing:
                raise MissingZoneReading(
                    f"No reading for zones {', '.join(missing)} at {record.timestamp.isoformat()}"
                )
            if previous is not None and record.timestamp - previous != STEP:
                raise SeriesGap(
                    f"Gap between {previous.isoformat()} and {record.timestamp.isoformat()}"
                )
            previous = record.timestamp

    def __len__(self) -> int:
        return len(self.records)

    def __getitem__(self, index: int) -> TelemetryRecord:
        return self.records[index]

    @property
    def start(self) -> datetime:
        return self.records[0].timestamp

    @property
    def end(self) -> datetime:
        return self.records[-1].timestamp

    @property
    def timestamps(self) -> list[datetime]:
        return [r.timestamp for r in self.records]

    def index_of(self, timestamp: datetime) -> int:
        """Position of a timestamp in the series.

        Raises:
            SeriesGap: If the timestamp is not covered
        """
        offset = timestamp - self.start
        index, remainder = divmod(offset, STEP)
        if remainder or not 0 <= index < len(self.records):
            raise SeriesGap(f"Telemetry has no record at {timestamp.isoformat()}")
        return int(index)

    def window(self, start: Union[int, datetime], length: int) -> "TelemetrySeries":
        """Sub-series of ``length`` records beginning at an index or timestamp.

        Raises:
            SeriesGap: If the series is too short
        """
        first = start if isinstance(start, int) else self.index_of(start)
        if length < 1:
            raise ValueError(f"Window length must be positive, got {length}")
        if first < 0 or first + length > len(self.records):
            raise SeriesGap(
                f"Need {length} records from index {first}, telemetry has {len(self.records)}"
            )
        return TelemetrySeries(self.records[first : first + length], self.zone_ids)

    def actions(self) -> dict[datetime, Action]:
        return {r.timestamp: r.action for r in self.records}

    def ambient(self) -> dict[datetime, float]:
        return {r.timestamp: r.ambient_temperature for r in self.records}

    def zone_matrix(self) -> pd.DataFrame:
        """Zone temperatures as a timestamp x zone frame."""
        return pd.DataFrame(
            [[r.zone_temperatures[z] for z in self.zone_ids] for r in self.records],
            index=pd.DatetimeIndex(self.timestamps, name="timestamp"),
            columns=list(self.zone_ids),
        )


def _to_float(raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        return math.nan


def _key(row_field: str, device_id: str) -> str:
    return f"{ZONE_FIELD}:{device_id}" if row_field == ZONE_FIELD else row_field


def parse_telemetry(frame: pd.DataFrame, source: Optional[str] = None) -> TelemetrySeries:
    """Validate and pivot a long-format telemetry frame.

    Args:
        frame: Frame with columns ``timestamp, device_id, field, value``
        source: File name used in diagnostics

    Returns:
        TelemetrySeries

    Raises:
        TelemetryFormatError: Wrong columns, unparsable values, missing required fields,
            or a building-level field from two devices at one timestamp
        MisalignedTimestamp: Timestamp off the 5-minute lattice
        DuplicateRecord: Same (timestamp, device, field) twice
        MissingZoneReading: A zone lacks a reading at some timestamp
        SeriesGap: Consecutive timestamps more than 5 minutes apart
    """
    if list(frame.columns) != COLUMNS:
        raise TelemetryFormatError(
            f"Expected columns {','.join(COLUMNS)}, got {','.join(map(str, frame.columns))}",
            source,
            1,
        )
    if frame.empty:
        raise TelemetryFormatError("Telemetry has no records", source)

    frame = frame.copy()
    # header is line 1
    frame["line"] = frame.index + 2

    parsed: dict[str, datetime] = {}
    for raw, line in zip(frame["timestamp"], frame["line"]):
        if raw in parsed:
            continue
        try:
            timestamp = date_parser.isoparse(str(raw))
        except ValueError:
            raise TelemetryFormatError(f"Bad timestamp {raw!r}", source, int(line))
        try:
            check_lattice(timestamp)
        except MisalignedTimestamp as e:
            raise MisalignedTimestamp(e.message, source, int(line))
        parsed[raw] = timestamp
    frame["timestamp"] = frame["timestamp"].map(parsed)

    duplicated = frame.duplicated(subset=["timestamp", "device_id", "field"], keep="first")
    if duplicated.any():
        row = frame[duplicated].iloc[0]
        raise DuplicateRecord(
            f"Second {row['field']} reading for {row['device_id']} at "
            f"{row['timestamp'].isoformat()}",
            source,
            int(row["line"]),
        )

    known = frame["field"].isin((ZONE_FIELD,) + REQUIRED_FIELDS + OPTIONAL_FIELDS)
    if not known.all():
        ignored = sorted(set(frame.loc[~known, "field"]))
        logger.debug(f"Ignoring telemetry fields: {', '.join(ignored)}")
        frame = frame[known].copy()

    frame["value"] = frame["value"].map(_to_float)
    bad = frame[~frame["value"].map(math.isfinite)]
    if not bad.empty:
        raise TelemetryFormatError("Value is not a finite number", source, int(bad["line"].iloc[0]))

    # building-level fields are pivoted without their device
    frame["key"] = [_key(f, d) for f, d in zip(frame["field"], frame["device_id"])]
    conflicting = frame.duplicated(subset=["timestamp", "key"], keep="first")
    if conflicting.any():
        row = frame[conflicting].iloc[0]
        raise TelemetryFormatError(
            f"{row['field']} reported by more than one device at "
            f"{row['timestamp'].isoformat()}",
            source,
            int(row["line"]),
        )

    table = frame.pivot(index="timestamp", columns="key", values="value").sort_index()
    zone_keys = sorted(k for k in table.columns if k.startswith(f"{ZONE_FIELD}:"))
    if not zone_keys:
        raise TelemetryFormatError(f"No {ZONE_FIELD} rows", source)
    zones = [k.split(":", 1)[1] for k in zone_keys]

    for name in REQUIRED_FIELDS:
        if name not in table.columns:
            raise TelemetryFormatError(f"Required field {name!r} never reported", source)
        missing = table.index[table[name].isna()]
        if len(missing):
            raise TelemetryFormatError(
                f"Required field {name!r} missing at {missing[0].isoformat()}", source
            )

    records = []
    for timestamp, row in table.iterrows():
        zone_values = row[zone_keys]
        if zone_values.isna().any():
            absent = [z for z, v in zip(zones, zone_values) if pd.isna(v)]
            raise MissingZoneReading(
                f"No reading for zones {', '.join(absent)} at {timestamp.isoformat()}", source
            )
        optional = {
            name: (float(row[name]) if name in row and not pd.isna(row[name]) else None)
            for name in OPTIONAL_FIELDS
        }
        records.append(
            TelemetryRecord(
                timestamp=timestamp.to_pydatetime(),
                zone_temperatures={z: float(v) for z, v in zip(zones, zone_values)},
                ambient_temperature=float(row[AMBIENT_FIELD]),
                supply_water_setpoint=float(row[WATER_SETPOINT_FIELD]),
                supply_air_setpoint=float(row[AIR_SETPOINT_FIELD]),
                supply_water_temperature=optional[WATER_TEMPERATURE_FIELD],
                supply_air_temperature=optional[AIR_TEMPERATURE_FIELD],
            )
        )

    try:
        return TelemetrySeries(tuple(records), tuple(zones))
    except SeriesGap as e:
        raise SeriesGap(e.message, source)


def load_telemetry(path: Union[str, Path]) -> TelemetrySeries:
    """Read a telemetry CSV.

    Raises:
        TelemetryFormatError: If the file cannot be read as CSV
    """
    path = Path(path)
    try:
        frame = pd.read_csv(
            path,
            dtype={"timestamp": str, "device_id": str, "field": str, "value": str},
            keep_default_na=False,
        )
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise TelemetryFormatError(f"Cannot read telemetry: {e}", path)
    series = parse_telemetry(frame, str(path))
    logger.info(f"Loaded {len(series)} telemetry records for {len(series.zone_ids)} zones")
    return series


def telemetry_rows(
    series: TelemetrySeries, devices: Optional[dict[str, str]] = None
) -> list[dict[str, str]]:
    """Long-format rows for a series (zones first, then building fields)."""
    devices = devices or {}
    rows = []
    for record in series.records:
        stamp = record.timestamp.isoformat()
        for zone in series.zone_ids:
            rows.append(
                {
                    "timestamp": stamp,
                    "device_id": zone,
                    "field": ZONE_FIELD,
                    "value": repr(record.zone_temperatures[zone]),
                }
            )
        values = {
            AMBIENT_FIELD: record.ambient_temperature,
            WATER_SETPOINT_FIELD: record.supply_water_setpoint,
            AIR_SETPOINT_FIELD: record.supply_air_setpoint,
            WATER_TEMPERATURE_FIELD: record.supply_water_temperature,
            AIR_TEMPERATURE_FIELD: record.supply_air_temperature,
        }
        for name, value in values.items():
            if value is None:
                continue
            rows.append(
                {
                    "timestamp": stamp,
                    "device_id": devices.get(name, "building"),
                    "field": name,
                    "value": repr(value),
                }
            )
    return rows


def write_telemetry(
    series: TelemetrySeries, path: Union[str, Path], devices: Optional[dict[str, str]] = None
) -> Path:
    """Write a series in the long CSV format read by :func:`load_telemetry`.

    Args:
        series: Series to write
        path: Output file
        devices: Optional field -> device id for the building-wide fields
    """
    path = Path(path)
    write_csv_atomic(path, COLUMNS, telemetry_rows(series, devices))
    return path

