"""Floorplan text format: header, optional zone aliases, then a glyph grid.

Example::

    # ground floor
    floor 1 dx_m 1.0 height_m 3.0
    zone-alias A open-office
    OOOOO
    OXXXO
    OXAXO
    OXXXO
    OOOOO

Glyphs: ``O`` outside air, ``X`` exterior wall, ``x`` interior wall, any
other ASCII letter or digit is an interior air cell of that zone.
"""

from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
from scipy import ndimage  # type: ignore[import-untyped]

from sbsim.core.errors import (
    DisconnectedZone,
    InvalidFloorplan,
    NoInterior,
    RaggedGrid,
    UnknownGlyph,
)
from sbsim.physics.grid import CellKind, Material, ThermalGrid

DEFAULT_DX = 1.0
DEFAULT_FLOOR_HEIGHT = 3.0


@dataclass(frozen=True)
class FloorplanDoc:
    """Parsed floorplan of one floor.

    Attributes:
        floor_id: Floor identifier
        dx: Cell size (m)
        floor_height: Floor-to-ceiling height (m)
        rows: Glyph rows, all of equal length
        zone_aliases: Zone glyph -> long zone name
    """

    floor_id: str
    dx: float
    floor_height: float
    rows: tuple[str, ...]
    zone_aliases: dict[str, str] = field(default_factory=dict)

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.rows), len(self.rows[0]))

    def glyph(self, row: int, col: int) -> str:
        return self.rows[row][col]

    def zone_id(self, glyph: str) -> str:
        """Zone id for a zone glyph (its alias when one is declared)."""
        return self.zone_aliases.get(glyph, glyph)

    def zone_at(self, row: int, col: int) -> Optional[str]:
        """Zone id of an interior air cell, None for walls, outside air or out of range."""
        if not (0 <= row < len(self.rows) and 0 <= col < len(self.rows[0])):
            return None
        glyph = self.rows[row][col]
        if CellKind.from_glyph(glyph) is not CellKind.INTERIOR_AIR:
            return None
        return self.zone_id(glyph)

    @property
    def zones(self) -> dict[str, list[tuple[int, int]]]:
        """Zone id -> air cells in row-major order."""
        cells: dict[str, list[tuple[int, int]]] = {}
        for r, line in enumerate(self.rows):
            for c, glyph in enumerate(line):
                if CellKind.from_glyph(glyph) is CellKind.INTERIOR_AIR:
                    cells.setdefault(self.zone_id(glyph), []).append((r, c))
        return dict(sorted(cells.items()))

    def to_grid(
        self,
        materials: Mapping[CellKind, Material],
        **kwargs: Any,
    ) -> ThermalGrid:
        """Build the thermal grid for this floor."""
        return ThermalGrid.from_layout(
            list(self.rows),
            materials,
            zone_aliases=self.zone_aliases,
            dx=self.dx,
            floor_height=self.floor_height,
            floor_id=self.floor_id,
            **kwargs,
        )


def _parse_header(
    tokens: list[str], source: Optional[str], line_no: int
) -> tuple[str, float, float]:
    if len(tokens) < 2 or len(tokens) % 2 != 0:
        raise InvalidFloorplan(
            "Header must be 'floor <id> [dx_m <v>] [height_m <v>]'", source, line_no
        )
    floor_id = tokens[1]
    values = {"dx_m": DEFAULT_DX, "height_m": DEFAULT_FLOOR_HEIGHT}
    for key, raw in zip(tokens[2::2], tokens[3::2]):
        if key not in values:
            raise InvalidFloorplan(f"Unknown header key {key!r}", source, line_no)
        try:
            values[key] = float(raw)
        except ValueError:
            raise InvalidFloorplan(f"Header value {key}={raw!r} is not a number", source, line_no)
        if not values[key] > 0:
            raise InvalidFloorplan(f"Header value {key} must be positive", source, line_no)
    return floor_id, values["dx_m"], values["height_m"]


def parse_floorplan(text: str, source: Optional[Union[str, Path]] = None) -> FloorplanDoc:
    """Parse and validate a floorplan document.

    Args:
        text: File contents
        source: File name used in diagnostics

    Returns:
        Validated FloorplanDoc

    Raises:
        InvalidFloorplan: Missing or malformed header or alias line, or an alias
            that renames a zone onto another zone glyph
        RaggedGrid: Rows of unequal length
        UnknownGlyph: Illegal character in the grid
        DisconnectedZone: A zone glyph forms more than one 4-connected region
        NoInterior: No interior air cells at all
    """
    src = str(source) if source is not None else None
    header: Optional[tuple[str, float, float]] = None
    aliases: dict[str, str] = {}
    alias_lines: dict[str, int] = {}
    rows: list[str] = []
    row_lines: list[int] = []

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if header is None:
            if tokens[0] != "floor":
                raise InvalidFloorplan("First line must be a 'floor' header", src, line_no)
            header = _parse_header(tokens, src, line_no)
            continue
        if tokens[0] == "zone-alias" and not rows:
            if len(tokens) != 3:
                raise InvalidFloorplan("Alias must be 'zone-alias <glyph> <name>'", src, line_no)
            glyph, name = tokens[1], tokens[2]
            if CellKind.from_glyph(glyph) is not CellKind.INTERIOR_AIR:
                raise UnknownGlyph(f"Alias glyph {glyph!r} is not a zone glyph", src, line_no)
            if glyph in aliases or name in aliases.values():
                raise InvalidFloorplan(f"Duplicate zone alias {glyph} {name}", src, line_no)
            aliases[glyph] = name
            alias_lines[glyph] = line_no
            continue
        rows.append(line)
        row_lines.append(line_no)

    if header is None:
        raise InvalidFloorplan("Missing 'floor' header", src)
    if not rows:
        raise NoInterior("Floorplan has no grid rows", src)

    width = len(rows[0])
    for row, line_no in zip(rows, row_lines):
        if len(row) != width:
            raise RaggedGrid(
                f"Row has length {len(row)}, expected {width}", src, line_no
            )

    for r, (row, line_no) in enumerate(zip(rows, row_lines)):
        for c, glyph in enumerate(row):
            if CellKind.from_glyph(glyph) is None:
                raise UnknownGlyph(f"Glyph {glyph!r} at row {r}, column {c}", src, line_no)

    floor_id, dx, height = header
    doc = FloorplanDoc(floor_id, dx, height, tuple(rows), aliases)
    _check_zones(doc, src, alias_lines)
    return doc


def _check_zones(
    doc: FloorplanDoc, source: Optional[str], alias_lines: Mapping[str, int]
) -> None:
    glyphs = np.array([list(row) for row in doc.rows])
    air = np.vectorize(lambda g: CellKind.from_glyph(g) is CellKind.INTERIOR_AIR)(glyphs)
    if not air.any():
        raise NoInterior(f"Floor {doc.floor_id} has no interior air cells", source)

    zone_glyphs = sorted(set(glyphs[air].tolist()))
    for glyph, name in doc.zone_aliases.items():
        # an alias may not rename a zone onto another, unaliased glyph
        if name != glyph and name in zone_glyphs and name not in doc.zone_aliases:
            raise InvalidFloorplan(
                f"Zone alias {glyph} {name} collides with zone glyph {name!r}",
                source,
                alias_lines[glyph],
            )
    for glyph in zone_glyphs:
        _, components = ndimage.label(glyphs == glyph)
        if components > 1:
            raise DisconnectedZone(
                f"Zone {doc.zone_id(glyph)!r} is split into {components} regions", source
            )


def load_floorplan(path: Union[str, Path]) -> FloorplanDoc:
    """Read and parse a floorplan file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise InvalidFloorplan(f"Cannot read floorplan: {e.strerror}", path)
    return parse_floorplan(text, source=path)


def serialize_floorplan(doc: FloorplanDoc) -> str:
    """Render a FloorplanDoc back to the text format."""
    lines = [f"floor {doc.floor_id} dx_m {doc.dx!r} height_m {doc.floor_height!r}"]
    for glyph, name in sorted(doc.zone_aliases.items()):
        lines.append(f"zone-alias {glyph} {name}")
    lines.extend(doc.rows)
    return "\n".join(lines) + "\n"
