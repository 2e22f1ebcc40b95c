"""Exogenous inputs for rollouts: setpoint policies and ambient series.

Schedule CSV::

    timestamp,supply_water_setpoint,supply_air_setpoint
    2024-01-01T00:00:00,333.15,291.15

Ambient CSV::

    timestamp,temperature
    2024-01-01T00:00:00,283.15
"""

import math
from datetime import datetime
from pathlib import Path
from typing import Optional, TypeVar, Union

import pandas as pd
from dateutil import parser as date_parser  # type: ignore[import-untyped]

from sbsim.core.errors import (
    DuplicateRecord,
    MisalignedTimestamp,
    TelemetryFormatError,
)
from sbsim.engine.simulator import STEP, Action, check_lattice


def _read_timed_csv(path: Path, columns: list[str]) -> list[tuple[int, datetime, list[float]]]:
    """Rows of (line, timestamp, values) from a CSV with a timestamp column."""
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except FileNotFoundError:
        raise TelemetryFormatError("File not found", path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise TelemetryFormatError(f"Cannot read CSV: {e}", path)
    missing = [c for c in ["timestamp", *columns] if c not in frame.columns]
    if missing:
        raise TelemetryFormatError(f"Missing columns: {', '.join(missing)}", path)

    rows = []
    seen: set[datetime] = set()
    for i, record in enumerate(frame.to_dict("records")):
        line = i + 2
        try:
            timestamp = date_parser.isoparse(record["timestamp"])
        except ValueError:
            raise TelemetryFormatError(f"Bad timestamp {record['timestamp']!r}", path, line)
        try:
            check_lattice(timestamp)
        except MisalignedTimestamp as e:
            raise MisalignedTimestamp(e.message, path, line)
        if timestamp in seen:
            raise DuplicateRecord(f"Timestamp {timestamp.isoformat()} given twice", path, line)
        seen.add(timestamp)
        try:
            values = [float(record[c]) for c in columns]
        except ValueError:
            raise TelemetryFormatError("Non-numeric value", path, line)
        if not all(math.isfinite(v) for v in values):
            raise TelemetryFormatError("Non-finite value", path, line)
        rows.append((line, timestamp, values))
    return rows


def load_schedule(path: Union[str, Path]) -> dict[datetime, Action]:
    """Timestamp -> setpoints from a schedule CSV."""
    rows = _read_timed_csv(Path(path), ["supply_water_setpoint", "supply_air_setpoint"])
    return {t: Action(values[0], values[1]) for _, t, values in rows}


def load_ambient(path: Union[str, Path]) -> dict[datetime, float]:
    """Timestamp -> outside temperature (K) from an ambient CSV."""
    return {t: values[0] for _, t, values in _read_timed_csv(Path(path), ["temperature"])}


T = TypeVar("T")


def constant_series(start: datetime, steps: int, value: T) -> dict[datetime, T]:
    """The same value at every step timestamp from ``start``."""
    return {start + k * STEP: value for k in range(steps)}


def parse_policy(
    text: Optional[str], start: datetime, steps: int, default: Action
) -> dict[datetime, Action]:
    """Expand a ``--policy`` argument into per-step setpoints.

    Accepted forms are ``constant <water K> <air K>`` and ``schedule <csv>``;
    None means a constant policy at ``default``.

    Raises:
        ValueError: If the text matches neither form
    """
    if text is None:
        return constant_series(start, steps, default)
    parts = text.split()
    if len(parts) == 3 and parts[0] == "constant":
        try:
            action = Action(float(parts[1]), float(parts[2]))
        except ValueError:
            raise ValueError(f"Bad setpoints in policy {text!r}")
        return constant_series(start, steps, action)
    if len(parts) == 2 and parts[0] == "schedule":
        return load_schedule(parts[1])
    raise ValueError(
        f"Policy must be 'constant <water K> <air K>' or 'schedule <csv>', got {text!r}"
    )

