"""Exception hierarchy for the simulator.

Every domain error is a ``ValueError`` subclass so callers that only care
about "bad input" can keep catching ``ValueError``. The CLI maps the three
families to exit codes: configuration problems exit 2, data and runtime
problems exit 3, and a calibration in which every candidate failed exits 4.
"""

from pathlib import Path
from typing import Optional, Union


class SimulationError(ValueError):
    """Base class for all simulator errors."""

    exit_code = 3

    def __init__(
        self,
        message: str,
        source: Optional[Union[str, Path]] = None,
        line: Optional[int] = None,
    ):
        """Initialize error.

        Args:
            message: Human-readable description
            source: File the error was found in (optional)
            line: 1-based line number within ``source`` (optional)
        """
        super().__init__(message)
        self.message = message
        self.source = str(source) if source is not None else None
        self.line = line

    @property
    def kind(self) -> str:
        """Short diagnostic name, e.g. ``RaggedGrid``."""
        return type(self).__name__

    def location(self) -> str:
        """Format ``file:line`` for diagnostics, empty when unknown."""
        if self.source is None:
            return ""
        if self.line is None:
            return self.source
        return f"{self.source}:{self.line}"

    def __str__(self) -> str:
        where = self.location()
        prefix = f"{where}: " if where else ""
        return f"{prefix}{self.kind}: {self.message}"


# Configuration errors (exit 2)


class ConfigError(SimulationError):
    """Invalid building manifest, floorplan, devices or calibration spec."""

    exit_code = 2


class InvalidFloorplan(ConfigError):
    pass


class RaggedGrid(ConfigError):
    pass


class UnknownGlyph(ConfigError):
    pass


class DisconnectedZone(ConfigError):
    pass


class NoInterior(ConfigError):
    pass


class InvalidDeviceLine(ConfigError):
    pass


class UnknownDeviceType(ConfigError):
    pass


class DiffuserOutsideZone(ConfigError):
    pass


class DuplicateDeviceId(ConfigError):
    pass


class MissingSingleton(ConfigError):
    pass


class UnknownZone(ConfigError):
    pass


class UnconditionedZone(ConfigError):
    pass


class ParameterOutOfBounds(ConfigError):
    pass


class ManifestInvalid(ConfigError):
    pass


class CalibrationSpecInvalid(ConfigError):
    pass


# Data errors (exit 3)


class DataError(SimulationError):
    """Telemetry or time-series input that cannot be replayed."""


class MisalignedTimestamp(DataError):
    pass


class SeriesGap(DataError):
    pass


class DuplicateRecord(DataError):
    pass


class MissingZoneReading(DataError):
    pass


class ZoneSetMismatch(DataError):
    pass


class TelemetryFormatError(DataError):
    pass


# Runtime errors (exit 3)


class RuntimeFault(SimulationError):
    """Failure while stepping the simulator."""


class NonFiniteTemperature(RuntimeFault):
    pass


class ActuatorLimitViolation(RuntimeFault):
    pass


class InvalidForcing(RuntimeFault):
    pass


class DegenerateCalibration(SimulationError):
    """Every calibration candidate failed."""

    exit_code = 4
