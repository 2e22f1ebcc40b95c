"""HVAC device placement file.

One device per line::

    # id      type          zone   diffusers          constants
    device vav-1 type vav zone A diffuser 2,2;2,3 design_flow=0.6
    device ahu-1 type ahu recirc_fraction=0.3
    device boiler-1 type boiler efficiency=0.92
    device chiller-1 type chiller cop=3.2

Omitted constants take the defaults in :data:`DEVICE_DEFAULTS`.
"""

import dataclasses
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from sbsim.building.floorplan import FloorplanDoc
from sbsim.core.errors import (
    DiffuserOutsideZone,
    DuplicateDeviceId,
    InvalidDeviceLine,
    MissingSingleton,
    UnconditionedZone,
    UnknownDeviceType,
    UnknownZone,
)

DEVICE_DEFAULTS: dict[str, dict[str, float]] = {
    "vav": {
        "design_flow": 0.5,
        "reheat_effectiveness": 0.8,
    },
    "ahu": {
        "intake_fan_power": 2000.0,
        "exhaust_fan_power": 1500.0,
        "time_constant": 900.0,
        "recirc_fraction": 0.3,
        "ventilation_damper": 0.2,
        "setpoint_min": 285.15,
        "setpoint_max": 300.15,
    },
    "boiler": {
        "efficiency": 0.9,
        "pump_power": 500.0,
        "time_constant": 900.0,
        "loop_loss_fraction": 0.05,
        "setpoint_min": 310.15,
        "setpoint_max": 360.15,
    },
    "chiller": {
        "cop": 3.5,
        "pump_power": 800.0,
    },
}

SINGLETON_TYPES = ("ahu", "boiler", "chiller")


@dataclass(frozen=True)
class DevicePlacement:
    """One HVAC device and where it sits.

    Attributes:
        device_id: Unique device identifier
        device_type: One of vav, ahu, boiler, chiller
        zone_id: Zone served (VAV only)
        diffusers: Diffuser cells as (row, col) (VAV only)
        constants: Device constants with defaults filled in
        floor_id: Floor of the served zone, resolved against floorplans
        line: Source line number
    """

    device_id: str
    device_type: str
    zone_id: Optional[str] = None
    diffusers: tuple[tuple[int, int], ...] = ()
    constants: dict[str, float] = field(default_factory=dict)
    floor_id: Optional[str] = None
    line: Optional[int] = None


def _parse_diffusers(raw: str, source: Optional[str], line_no: int) -> tuple[tuple[int, int], ...]:
    cells = []
    for item in raw.split(";"):
        if not item:
            continue
        try:
            row, col = (int(v) for v in item.split(","))
        except ValueError:
            raise InvalidDeviceLine(f"Bad diffuser coordinate {item!r}", source, line_no)
        cells.append((row, col))
    if not cells:
        raise InvalidDeviceLine("Empty diffuser list", source, line_no)
    return tuple(cells)


def _parse_line(tokens: list[str], source: Optional[str], line_no: int) -> DevicePlacement:
    if len(tokens) < 4 or tokens[0] != "device" or tokens[2] != "type":
        raise InvalidDeviceLine("Expected 'device <id> type <type> ...'", source, line_no)
    device_id, device_type = tokens[1], tokens[3]
    if device_type not in DEVICE_DEFAULTS:
        raise UnknownDeviceType(
            f"Device {device_id} has unknown type {device_type!r}", source, line_no
        )

    zone_id: Optional[str] = None
    diffusers: tuple[tuple[int, int], ...] = ()
    constants = dict(DEVICE_DEFAULTS[device_type])

    rest = tokens[4:]
    i = 0
    while i < len(rest):
        token = rest[i]
        if token in ("zone", "diffuser"):
            if i + 1 >= len(rest):
                raise InvalidDeviceLine(f"'{token}' needs a value", source, line_no)
            if token == "zone":
                zone_id = rest[i + 1]
            else:
                diffusers = _parse_diffusers(rest[i + 1], source, line_no)
            i += 2
            continue
        key, sep, value = token.partition("=")
        if not sep:
            raise InvalidDeviceLine(f"Unexpected token {token!r}", source, line_no)
        if key not in constants:
            raise InvalidDeviceLine(f"Unknown constant {key!r} for {device_type}", source, line_no)
        try:
            constants[key] = float(value)
        except ValueError:
            raise InvalidDeviceLine(f"Constant {key}={value!r} is not a number", source, line_no)
        i += 1

    if device_type == "vav":
        if zone_id is None or not diffusers:
            raise InvalidDeviceLine(f"VAV {device_id} needs a zone and diffusers", source, line_no)
    elif zone_id is not None or diffusers:
        raise InvalidDeviceLine(
            f"{device_type} {device_id} cannot have a zone or diffusers", source, line_no
        )

    return DevicePlacement(device_id, device_type, zone_id, diffusers, constants, None, line_no)


def parse_devices(
    text: str,
    floors: Optional[Sequence[FloorplanDoc]] = None,
    source: Optional[Union[str, Path]] = None,
) -> list[DevicePlacement]:
    """Parse and validate a devices file.

    Placement checks (zone existence, diffusers inside their zone, one VAV
    per zone at least) run only when ``floors`` is given.

    Args:
        text: File contents
        floors: Parsed floorplans of the building
        source: File name used in diagnostics

    Returns:
        Device placements in file order

    Raises:
        UnknownDeviceType: Type is not vav, ahu, boiler or chiller
        DuplicateDeviceId: Same id declared twice
        MissingSingleton: Missing or repeated ahu, boiler or chiller
        DiffuserOutsideZone: Diffuser not on an air cell of the VAV's zone
        UnknownZone: VAV references a zone absent from the floorplans
        UnconditionedZone: A zone has no VAV
    """
    src = str(source) if source is not None else None
    placements: list[DevicePlacement] = []
    seen: dict[str, int] = {}
    singletons: dict[str, int] = {}

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        placement = _parse_line(line.split(), src, line_no)
        if placement.device_id in seen:
            raise DuplicateDeviceId(
                f"Device {placement.device_id} already declared on line "
                f"{seen[placement.device_id]}",
                src,
                line_no,
            )
        seen[placement.device_id] = line_no
        if placement.device_type in SINGLETON_TYPES:
            if placement.device_type in singletons:
                raise MissingSingleton(
                    f"Duplicate {placement.device_type} (first on line "
                    f"{singletons[placement.device_type]})",
                    src,
                    line_no,
                )
            singletons[placement.device_type] = line_no
        placements.append(placement)

    for device_type in SINGLETON_TYPES:
        if device_type not in singletons:
            raise MissingSingleton(f"Building needs exactly one {device_type}", src)

    if floors is not None:
        placements = resolve_placements(placements, floors, src)
    return placements


def resolve_placements(
    placements: Sequence[DevicePlacement],
    floors: Sequence[FloorplanDoc],
    source: Optional[str] = None,
) -> list[DevicePlacement]:
    """Check placements against floorplans and fill in each VAV's floor."""
    zone_floor: dict[str, FloorplanDoc] = {}
    for floor in floors:
        for zone in floor.zones:
            zone_floor[zone] = floor

    resolved = []
    conditioned = set()
    for placement in placements:
        if placement.device_type != "vav":
            resolved.append(placement)
            continue
        zone = placement.zone_id or ""
        floor = zone_floor.get(zone)
        if floor is None:
            raise UnknownZone(
                f"VAV {placement.device_id} serves unknown zone {zone!r}", source, placement.line
            )
        for row, col in placement.diffusers:
            if floor.zone_at(row, col) != zone:
                raise DiffuserOutsideZone(
                    f"Diffuser ({row},{col}) of {placement.device_id} is not in zone {zone!r}",
                    source,
                    placement.line,
                )
        conditioned.add(zone)
        resolved.append(dataclasses.replace(placement, floor_id=floor.floor_id))

    for zone in sorted(set(zone_floor) - conditioned):
        raise UnconditionedZone(f"Zone {zone!r} has no VAV", source)
    return resolved


def load_devices(
    path: Union[str, Path], floors: Optional[Sequence[FloorplanDoc]] = None
) -> list[DevicePlacement]:
    """Read and parse a devices file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise InvalidDeviceLine(f"Cannot read devices file: {e.strerror}", path)
    return parse_devices(text, floors, source=path)


def serialize_devices(placements: Sequence[DevicePlacement]) -> str:
    """Render placements back to the line format (all constants explicit)."""
    lines = []
    for p in placements:
        parts = ["device", p.device_id, "type", p.device_type]
        if p.zone_id is not None:
            parts += ["zone", p.zone_id]
        if p.diffusers:
            parts += ["diffuser", ";".join(f"{r},{c}" for r, c in p.diffusers)]
        parts += [f"{key}={value!r}" for key, value in sorted(p.constants.items())]
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"
