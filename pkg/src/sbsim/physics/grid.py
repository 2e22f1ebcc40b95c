"""Finite-difference thermal grid for a single, thermally isolated floor.

Each cell is a control volume of ``dx * dx * floor_height``. The explicit
update applies ``Q_ext + Q1 + Q2 + Q3 + Q4 = M c dT/dt`` to every cell that
is not outside air, with Fourier conduction across interior faces and
forced convection across faces that touch outside air.

Conduction is integrated with forward Euler. Convective faces use the
exponential integrating factor of the cell they bound, so a cell whose only
exchange is with outside air follows the lumped-capacitance solution exactly
at any substep length.
"""

import logging
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy import ndimage  # type: ignore[import-untyped]

from sbsim.core.errors import (
    DiffuserOutsideZone,
    DisconnectedZone,
    InvalidForcing,
    NonFiniteTemperature,
    UnknownZone,
)

logger = logging.getLogger(__name__)

OUTSIDE_GLYPH = "O"
EXTERIOR_WALL_GLYPH = "X"
INTERIOR_WALL_GLYPH = "x"

# Explicit 2D diffusion stays monotone while dt * sum(G) / C <= 1, which for a
# uniform interior cell is the familiar Fourier number limit of 1/4.
MAX_FOURIER_NUMBER = 0.25

Cell = tuple[int, int]


@dataclass(frozen=True)
class Material:
    """Bulk thermal properties of a control volume.

    Attributes:
        conductivity: Thermal conductivity k (W/m/K)
        density: Density rho (kg/m^3)
        heat_capacity: Specific heat capacity c (J/kg/K)
    """

    conductivity: float
    density: float
    heat_capacity: float

    def __post_init__(self) -> None:
        for name in ("conductivity", "density", "heat_capacity"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise ValueError(f"Material {name} must be finite and positive, got {value}")

    @property
    def diffusivity(self) -> float:
        """Thermal diffusivity k / (rho c) in m^2/s."""
        return self.conductivity / (self.density * self.heat_capacity)


AIR = Material(conductivity=0.026, density=1.2, heat_capacity=1006.0)


class CellKind(Enum):
    """Role of a control volume in the floor grid."""

    OUTSIDE_AIR = 0
    EXTERIOR_WALL = 1
    INTERIOR_WALL = 2
    INTERIOR_AIR = 3

    @classmethod
    def from_glyph(cls, glyph: str) -> Optional["CellKind"]:
        """Classify a floorplan glyph.

        Args:
            glyph: Single character from a floorplan grid

        Returns:
            The cell kind, or None if the glyph is not legal
        """
        if glyph == OUTSIDE_GLYPH:
            return cls.OUTSIDE_AIR
        if glyph == EXTERIOR_WALL_GLYPH:
            return cls.EXTERIOR_WALL
        if glyph == INTERIOR_WALL_GLYPH:
            return cls.INTERIOR_WALL
        if len(glyph) == 1 and glyph.isascii() and glyph.isalnum():
            return cls.INTERIOR_AIR
        return None


@dataclass(frozen=True)
class ControlVolume:
    """Read-only view of one grid cell."""

    kind: CellKind
    temperature: float
    material: Material
    mass: float
    has_diffuser: bool
    zone_id: Optional[str] = None


@dataclass(frozen=True)
class StepDiagnostics:
    """Energy bookkeeping for one call to :func:`step_energy_balance`.

    Attributes:
        total_internal_energy: Sum of M c T over non-boundary cells after the step (J)
        boundary_energy_exchanged: Energy that entered the floor from outside air (J)
        external_energy_injected: Energy delivered by diffusers (J)
        substeps_used: Number of uniform explicit substeps
    """

    total_internal_energy: float
    boundary_energy_exchanged: float
    external_energy_injected: float
    substeps_used: int


def harmonic_mean(a: float, b: float) -> float:
    """Interface conductivity between two dissimilar cells."""
    return 2.0 * a * b / (a + b)


def conduction_flux(
    t_self: float, t_neighbor: float, k_interface: float, face_area: float, dx: float
) -> float:
    """Fourier conduction into ``self`` across one face (W)."""
    return k_interface * face_area * (t_neighbor - t_self) / dx


def convection_flux(t_surface: float, t_ambient: float, h: float, face_area: float) -> float:
    """Forced convection into a surface cell from ambient air (W)."""
    return h * face_area * (t_ambient - t_surface)


def _integrating_factor(x: np.ndarray) -> np.ndarray:
    """Elementwise ``(1 - exp(-x)) / x``, 1 where ``x`` is 0."""
    safe = np.where(x > 0.0, x, 1.0)
    return np.where(x > 0.0, -np.expm1(-safe) / safe, 1.0)


def exact_mean(values: np.ndarray) -> float:
    """Mean that does not depend on the order of ``values``.

    Offsetting by the minimum keeps every difference exact for temperatures
    of similar magnitude, and ``math.fsum`` rounds the sum once.
    """
    if values.size == 0:
        raise ValueError("Cannot average an empty set of temperatures")
    low = float(values.min())
    return low + math.fsum((values - low).tolist()) / values.size


class ThermalGrid:
    """Control-volume lattice for one floor.

    Temperatures live in a ``(rows, cols)`` float64 array; material
    properties are folded into per-cell heat capacities and per-face
    conductances at construction time so a step is pure array arithmetic.
    """

    def __init__(
        self,
        kinds: np.ndarray,
        zone_ids: np.ndarray,
        materials: Mapping[CellKind, Material],
        *,
        dx: float = 1.0,
        floor_height: float = 3.0,
        convection_coefficient: float,
        shuffle_probability: float,
        diffusers: Iterable[Cell] = (),
        initial_temperature: float = 293.15,
        floor_id: str = "1",
    ):
        """Initialize grid.

        Args:
            kinds: ``(rows, cols)`` array of :class:`CellKind` values (integer codes)
            zone_ids: ``(rows, cols)`` object array of zone ids ("" for non-air)
            materials: Material per non-outside cell kind
            dx: Horizontal cell size (m)
            floor_height: Vertical extent of every control volume (m)
            convection_coefficient: Exterior forced convection coefficient h (W/m^2/K)
            shuffle_probability: Per-step probability that an air cell is shuffled
            diffusers: Cells that receive HVAC power
            initial_temperature: Uniform starting temperature (K)
            floor_id: Identifier of the floor this grid represents

        Raises:
            ValueError: If geometry or parameters are invalid
            DisconnectedZone: If a zone is not 4-connected
            DiffuserOutsideZone: If a diffuser is not on an interior air cell
        """
        kinds = np.asarray(kinds, dtype=np.int8)
        if kinds.ndim != 2 or kinds.size == 0:
            raise ValueError("Grid must be a non-empty 2D array")
        if zone_ids.shape != kinds.shape:
            raise ValueError("Zone map shape does not match grid shape")
        if not dx > 0 or not floor_height > 0:
            raise ValueError(f"dx and floor_height must be positive, got {dx}, {floor_height}")
        if not convection_coefficient > 0:
            raise ValueError(
                f"Convection coefficient must be positive, got {convection_coefficient}"
            )
        if not 0.0 <= shuffle_probability <= 1.0:
            raise ValueError(
                f"Shuffle probability must be within [0, 1], got {shuffle_probability}"
            )

        self.floor_id = floor_id
        self.dx = float(dx)
        self.floor_height = float(floor_height)
        self.convection_coefficient = float(convection_coefficient)
        self.shuffle_probability = float(shuffle_probability)
        self.materials = dict(materials)
        self._kinds = kinds
        self._zone_map = zone_ids

        self._outside = kinds == CellKind.OUTSIDE_AIR.value
        self._air = kinds == CellKind.INTERIOR_AIR.value
        self._zone_index = self._index_zones()

        self._diffuser = np.zeros(kinds.shape, dtype=bool)
        for row, col in diffusers:
            if not self.in_bounds(row, col) or not self._air[row, col]:
                raise DiffuserOutsideZone(
                    f"Diffuser at ({row},{col}) on floor {floor_id} is not an interior air cell"
                )
            self._diffuser[row, col] = True

        self._temperature = np.full(kinds.shape, float(initial_temperature), dtype=np.float64)
        self._build_coefficients()

    @classmethod
    def from_layout(
        cls,
        layout: Sequence[str],
        materials: Optional[Mapping[CellKind, Material]] = None,
        *,
        zone_aliases: Optional[Mapping[str, str]] = None,
        **kwargs: object,
    ) -> "ThermalGrid":
        """Build a grid from rows of floorplan glyphs.

        Args:
            layout: Equal-length strings using 'O', 'X', 'x' and zone glyphs
            materials: Materials per cell kind; air defaults to :data:`AIR`
            zone_aliases: Optional glyph -> zone id mapping
            **kwargs: Forwarded to the constructor

        Returns:
            New ThermalGrid
        """
        aliases = dict(zone_aliases or {})
        rows, cols = len(layout), len(layout[0]) if layout else 0
        kinds = np.zeros((rows, cols), dtype=np.int8)
        zones = np.full((rows, cols), "", dtype=object)
        for r, line in enumerate(layout):
            if len(line) != cols:
                raise ValueError(f"Row {r} has length {len(line)}, expected {cols}")
            for c, glyph in enumerate(line):
                kind = CellKind.from_glyph(glyph)
                if kind is None:
                    raise ValueError(f"Unknown glyph {glyph!r} at ({r},{c})")
                kinds[r, c] = kind.value
                if kind is CellKind.INTERIOR_AIR:
                    zones[r, c] = aliases.get(glyph, glyph)

        merged = {CellKind.INTERIOR_AIR: AIR}
        merged.update(materials or {})
        return cls(kinds, zones, merged, **kwargs)  # type: ignore[arg-type]

    # Construction helpers

    def _index_zones(self) -> dict[str, np.ndarray]:
        """Map zone id -> row-major flat indices of its air cells."""
        index: dict[str, np.ndarray] = {}
        labels = sorted({str(z) for z in self._zone_map[self._air]})
        for zone in labels:
            mask = self._air & (self._zone_map == zone)
            _, components = ndimage.label(mask)
            if components != 1:
                raise DisconnectedZone(
                    f"Zone {zone!r} on floor {self.floor_id} is split into {components} regions"
                )
            index[zone] = np.flatnonzero(mask)
        return index

    def _material_grid(self, attribute: str) -> np.ndarray:
        values = np.zeros(self._kinds.shape, dtype=np.float64)
        for kind in CellKind:
            if kind is CellKind.OUTSIDE_AIR:
                continue
            mask = self._kinds == kind.value
            if not mask.any():
                continue
            if kind not in self.materials:
                raise ValueError(f"No material given for {kind.name}")
            values[mask] = getattr(self.materials[kind], attribute)
        return values

    def _face_conductance(self, k_a: np.ndarray, k_b: np.ndarray, out_a: np.ndarray,
                          out_b: np.ndarray) -> np.ndarray:
        area = self.dx * self.floor_height
        with np.errstate(divide="ignore", invalid="ignore"):
            conduction = np.where(
                (k_a + k_b) > 0, 2.0 * k_a * k_b / (k_a + k_b), 0.0
            ) * area / self.dx
        convection = self.convection_coefficient * area
        g = np.where(out_a ^ out_b, convection, conduction)
        return np.where(out_a & out_b, 0.0, g)

    def _build_coefficients(self) -> None:
        k = self._material_grid("conductivity")
        rho = self._material_grid("density")
        c = self._material_grid("heat_capacity")
        volume = self.dx * self.dx * self.floor_height

        self._mass = rho * volume
        self._capacity = self._mass * c
        self._inv_capacity = np.zeros_like(self._capacity)
        inside = ~self._outside
        self._inv_capacity[inside] = 1.0 / self._capacity[inside]

        out = self._outside
        self._g_h = self._face_conductance(k[:, :-1], k[:, 1:], out[:, :-1], out[:, 1:])
        self._g_v = self._face_conductance(k[:-1, :], k[1:, :], out[:-1, :], out[1:, :])

        g_sum = np.zeros_like(self._capacity)
        g_sum[:, :-1] += self._g_h
        g_sum[:, 1:] += self._g_h
        g_sum[:-1, :] += self._g_v
        g_sum[1:, :] += self._g_v
        self._rate = g_sum * self._inv_capacity
        self._max_rate = float(np.max(self._rate))
        self._outside_flat = np.flatnonzero(self._outside)

        # rate of the non-outside cell on each convective face, 0 elsewhere
        conv_h = out[:, :-1] ^ out[:, 1:]
        conv_v = out[:-1, :] ^ out[1:, :]
        rate = self._rate
        self._face_rate_h = np.where(conv_h, np.maximum(rate[:, :-1], rate[:, 1:]), 0.0)
        self._face_rate_v = np.where(conv_v, np.maximum(rate[:-1, :], rate[1:, :]), 0.0)
        self._effective: Optional[tuple[float, np.ndarray, np.ndarray]] = None

    def effective_conductances(self, sub_dt: float) -> tuple[np.ndarray, np.ndarray]:
        """Horizontal and vertical face conductances for substeps of ``sub_dt``.

        Conduction faces are returned unchanged. A convective face is scaled
        by ``(1 - exp(-r dt)) / (r dt)``, where ``r`` is the total exchange
        rate of the cell it bounds, which never exceeds 1.
        """
        if self._effective is not None and self._effective[0] == sub_dt:
            return self._effective[1], self._effective[2]
        g_h = self._g_h * _integrating_factor(self._face_rate_h * sub_dt)
        g_v = self._g_v * _integrating_factor(self._face_rate_v * sub_dt)
        self._effective = (sub_dt, g_h, g_v)
        return g_h, g_v

    # Geometry and state access

    @property
    def rows(self) -> int:
        return int(self._kinds.shape[0])

    @property
    def cols(self) -> int:
        return int(self._kinds.shape[1])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def temperature(self) -> np.ndarray:
        """Live ``(rows, cols)`` temperature array (K)."""
        return self._temperature

    @property
    def zone_ids(self) -> list[str]:
        """Sorted zone ids present on this floor."""
        return list(self._zone_index)

    @property
    def air_mask(self) -> np.ndarray:
        return self._air

    @property
    def zone_map(self) -> np.ndarray:
        return self._zone_map

    @property
    def diffusers(self) -> list[Cell]:
        return [(int(r), int(c)) for r, c in zip(*np.nonzero(self._diffuser))]

    def in_bounds(self, row: int, col: int) -> bool:
        return 0 <= row < self.rows and 0 <= col < self.cols

    def kind(self, row: int, col: int) -> CellKind:
        return CellKind(int(self._kinds[row, col]))

    def has_diffuser(self, row: int, col: int) -> bool:
        return self.in_bounds(row, col) and bool(self._diffuser[row, col])

    def cell(self, row: int, col: int) -> ControlVolume:
        """Return a read-only view of one control volume."""
        kind = self.kind(row, col)
        zone = str(self._zone_map[row, col]) or None
        return ControlVolume(
            kind=kind,
            temperature=float(self._temperature[row, col]),
            material=self.materials.get(kind, AIR),
            mass=float(self._mass[row, col]) if kind is not CellKind.OUTSIDE_AIR else 0.0,
            has_diffuser=bool(self._diffuser[row, col]),
            zone_id=zone,
        )

    @property
    def cells(self) -> list[ControlVolume]:
        """All control volumes in row-major order."""
        return [self.cell(r, c) for r in range(self.rows) for c in range(self.cols)]

    def zone_cells(self, zone: str) -> np.ndarray:
        """Row-major flat indices of a zone's air cells.

        Raises:
            UnknownZone: If the zone is not on this floor
        """
        try:
            return self._zone_index[zone]
        except KeyError:
            raise UnknownZone(f"Zone {zone!r} is not on floor {self.floor_id}") from None

    def zone_mean(self, zone: str) -> float:
        """Mean air temperature of a zone (K)."""
        return exact_mean(self._temperature.reshape(-1)[self.zone_cells(zone)])

    def internal_energy(self) -> float:
        """Sum of M c T over non-boundary cells, accumulated exactly (J)."""
        inside = ~self._outside
        return math.fsum((self._capacity[inside] * self._temperature[inside]).tolist())

    def substeps_for(self, dt: float) -> int:
        """Smallest uniform substep count that keeps the explicit update monotone."""
        if self._max_rate <= 0.0:
            return 1
        return max(1, math.ceil(dt * self._max_rate * (1.0 - 1e-12)))

    def initialize(
        self, zone_temperatures: Mapping[str, float], ambient_temperature: float
    ) -> None:
        """Set the field from per-zone air temperatures.

        Air cells take their zone's temperature and outside cells the ambient
        temperature. Walls are filled in one pass from their 4-neighbours:
        interior walls take the mean of adjacent air cells, exterior walls
        the mean of adjacent air cells and the ambient temperature. An
        interior wall with no adjacent air takes the floor's mean air
        temperature.

        Raises:
            UnknownZone: If a zone on this floor has no temperature
        """
        flat = self._temperature.reshape(-1)
        flat[:] = ambient_temperature
        for zone, cells in self._zone_index.items():
            if zone not in zone_temperatures:
                raise UnknownZone(f"No temperature for zone {zone!r} on floor {self.floor_id}")
            flat[cells] = float(zone_temperatures[zone])

        air = self._air
        padded_t = np.pad(np.where(air, self._temperature, 0.0), 1)
        padded_n = np.pad(air.astype(np.float64), 1)
        air_sum = (
            padded_t[:-2, 1:-1] + padded_t[2:, 1:-1] + padded_t[1:-1, :-2] + padded_t[1:-1, 2:]
        )
        air_count = (
            padded_n[:-2, 1:-1] + padded_n[2:, 1:-1] + padded_n[1:-1, :-2] + padded_n[1:-1, 2:]
        )

        exterior = self._kinds == CellKind.EXTERIOR_WALL.value
        interior = self._kinds == CellKind.INTERIOR_WALL.value
        self._temperature[exterior] = (air_sum[exterior] + ambient_temperature) / (
            air_count[exterior] + 1.0
        )
        floor_mean = exact_mean(self._temperature[air])
        interior_values = np.where(
            air_count > 0, air_sum / np.maximum(air_count, 1.0), floor_mean
        )
        self._temperature[interior] = interior_values[interior]

    def copy(self) -> "ThermalGrid":
        """Independent copy sharing the immutable coefficient arrays."""
        clone = object.__new__(ThermalGrid)
        clone.__dict__.update(self.__dict__)
        clone._temperature = self._temperature.copy()
        return clone


def step_energy_balance(
    grid: ThermalGrid,
    dt: float,
    external_power: Mapping[Cell, float],
    ambient_temperature: float,
) -> tuple[ThermalGrid, StepDiagnostics]:
    """Advance a grid by ``dt`` seconds with explicit substepping.

    Outside-air cells are pinned at ``ambient_temperature``; every other cell
    integrates its face fluxes plus any diffuser power, with convective faces
    scaled as in :meth:`ThermalGrid.effective_conductances`. Fluxes are computed
    once per face and added to one side and subtracted from the other, so
    interior exchange sums to zero exactly.

    Args:
        grid: Grid to update in place
        dt: Step length (s)
        external_power: Diffuser cell -> power (W)
        ambient_temperature: Outside air temperature (K)

    Returns:
        The same grid and the step's energy diagnostics

    Raises:
        InvalidForcing: If power is applied to a cell without a diffuser
        NonFiniteTemperature: If any temperature becomes NaN or infinite
    """
    if not dt > 0:
        raise ValueError(f"Step length must be positive, got {dt}")

    forcing = np.zeros(grid.shape, dtype=np.float64)
    for (row, col), power in external_power.items():
        if not grid.has_diffuser(row, col):
            raise InvalidForcing(f"Cell ({row},{col}) on floor {grid.floor_id} has no diffuser")
        forcing[row, col] += power

    temperature = grid._temperature
    temperature[grid._outside] = ambient_temperature

    substeps = grid.substeps_for(dt)
    sub_dt = dt / substeps
    scale = sub_dt * grid._inv_capacity
    g_h, g_v = grid.effective_conductances(sub_dt)
    outside = grid._outside_flat

    net = np.empty_like(temperature)
    flux_h = np.empty_like(g_h)
    flux_v = np.empty_like(g_v)
    boundary = 0.0

    for _ in range(substeps):
        np.copyto(net, forcing)
        np.subtract(temperature[:, 1:], temperature[:, :-1], out=flux_h)
        flux_h *= g_h
        net[:, :-1] += flux_h
        net[:, 1:] -= flux_h
        np.subtract(temperature[1:, :], temperature[:-1, :], out=flux_v)
        flux_v *= g_v
        net[:-1, :] += flux_v
        net[1:, :] -= flux_v
        if outside.size:
            boundary -= sub_dt * float(net.reshape(-1)[outside].sum())
        net *= scale
        temperature += net

    if not np.isfinite(temperature).all():
        raise NonFiniteTemperature(
            f"Floor {grid.floor_id} diverged after {substeps} substeps of {sub_dt:.4g} s"
        )

    logger.debug(f"Floor {grid.floor_id}: {substeps} substeps of {sub_dt:.4g} s")
    diagnostics = StepDiagnostics(
        total_internal_energy=grid.internal_energy(),
        boundary_energy_exchanged=boundary,
        external_energy_injected=dt * math.fsum(forcing.reshape(-1).tolist()),
        substeps_used=substeps,
    )
    return grid, diagnostics


def shuffle_air(grid: ThermalGrid, rng: np.random.Generator) -> ThermalGrid:
    """Randomly permute air temperatures within each zone.

    Every air cell is selected independently with the grid's shuffle
    probability; the selected temperatures are permuted among themselves.
    Zones are visited in sorted order so the random stream is consumed the
    same way on every run.

    Args:
        grid: Grid to shuffle in place
        rng: Engine-owned generator

    Returns:
        The same grid
    """
    flat = grid._temperature.reshape(-1)
    probability = grid.shuffle_probability
    for zone in grid.zone_ids:
        cells = grid.zone_cells(zone)
        picked = cells[rng.random(cells.size) < probability]
        if picked.size > 1:
            flat[picked] = flat[picked][rng.permutation(picked.size)]
    return grid
