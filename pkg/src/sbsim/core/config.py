"""Building manifest loading and validation."""

import copy
from pathlib import Path
from typing import Any, Optional, Union

import yaml  # type: ignore[import-untyped]
from jsonschema import ValidationError, validate  # type: ignore[import-untyped]

from sbsim.core.errors import ManifestInvalid

_NUMBER = {"type": "number"}
_POSITIVE = {"type": "number", "exclusiveMinimum": 0}
_NON_NEGATIVE = {"type": "number", "minimum": 0}

_COMFORT_BAND = {
    "type": "object",
    "properties": {
        "heating_setpoint": _POSITIVE,
        "cooling_setpoint": _POSITIVE,
        "deadband": _NON_NEGATIVE,
    },
    "additionalProperties": False,
}


class ManifestManager:
    """Read-only access to a building manifest.

    The manifest is merged over :attr:`DEFAULT_MANIFEST` so every key exists,
    then validated against :attr:`MANIFEST_SCHEMA`. Relative paths inside
    the manifest resolve against the manifest's directory.
    """

    DEFAULT_MANIFEST: dict[str, Any] = {
        "version": "1.0",
        "name": "building",
        "floors": [],
        "devices": None,
        "parameters": {},
        "comfort": {
            "default": {
                "heating_setpoint": 293.15,
                "cooling_setpoint": 297.15,
                "deadband": 0.5,
            },
            "zones": {},
        },
        "reward": {
            "weights": {"carbon": 1.0, "energy": 1.0, "comfort": 10.0},
            "scales": {"carbon_kg": 1.0, "energy_j": 3.6e6, "comfort_k": 1.0},
        },
        "emission_factors": {
            "electricity_kg_per_j": 1.1e-7,
            "gas_kg_per_j": 5.0e-8,
        },
        "air": {
            "conductivity": 0.026,
            "density": 1.2,
            "heat_capacity": 1006.0,
        },
        "simulation": {
            "seed": 0,
            "start": "2024-01-01T00:00:00",
            "initial_zone_temperature": 294.15,
            "ambient_temperature": 283.15,
            "supply_water_setpoint": 333.15,
            "supply_air_setpoint": 291.15,
        },
    }

    MANIFEST_SCHEMA: dict[str, Any] = {
        "type": "object",
        "properties": {
            "version": {"type": "string"},
            "name": {"type": "string"},
            "floors": {"type": "array", "items": {"type": "string"}, "minItems": 1},
            "devices": {"type": "string"},
            "parameters": {
                "type": "object",
                "additionalProperties": _NUMBER,
            },
            "comfort": {
                "type": "object",
                "properties": {
                    "default": _COMFORT_BAND,
                    "zones": {"type": "object", "additionalProperties": _COMFORT_BAND},
                },
            },
            "reward": {
                "type": "object",
                "properties": {
                    "weights": {
                        "type": "object",
                        "properties": {
                            "carbon": _NON_NEGATIVE,
                            "energy": _NON_NEGATIVE,
                            "comfort": _NON_NEGATIVE,
                        },
                        "additionalProperties": False,
                    },
                    "scales": {
                        "type": "object",
                        "properties": {
                            "carbon_kg": _POSITIVE,
                            "energy_j": _POSITIVE,
                            "comfort_k": _POSITIVE,
                        },
                        "additionalProperties": False,
                    },
                },
            },
            "emission_factors": {
                "type": "object",
                "properties": {
                    "electricity_kg_per_j": _NON_NEGATIVE,
                    "gas_kg_per_j": _NON_NEGATIVE,
                },
                "additionalProperties": False,
            },
            "air": {
                "type": "object",
                "properties": {
                    "conductivity": _POSITIVE,
                    "density": _POSITIVE,
                    "heat_capacity": _POSITIVE,
                },
                "additionalProperties": False,
            },
            "simulation": {
                "type": "object",
                "properties": {
                    "seed": {"type": "integer", "minimum": 0},
                    "start": {"type": "string"},
                    "initial_zone_temperature": _POSITIVE,
                    "ambient_temperature": _POSITIVE,
                    "supply_water_setpoint": _POSITIVE,
                    "supply_air_setpoint": _POSITIVE,
                },
                "additionalProperties": False,
            },
        },
        "required": ["version", "floors", "devices"],
    }

    def __init__(self, manifest_path: Union[str, Path]):
        """Initialize manifest manager.

        Args:
            manifest_path: Path to the YAML manifest

        Raises:
            ManifestInvalid: If the file is missing, unreadable or fails validation
        """
        self.manifest_path = Path(manifest_path)
        self._manifest: dict[str, Any] = {}
        self._load()

    def _load(self) -> None:
        """Load manifest and merge it over the defaults."""
        if not self.manifest_path.is_file():
            raise ManifestInvalid("Manifest file not found", self.manifest_path)
        try:
            with open(self.manifest_path, encoding="utf-8") as f:
                loaded = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            line = mark.line + 1 if mark is not None else None
            raise ManifestInvalid(f"YAML parse error: {e}", self.manifest_path, line)
        if not isinstance(loaded, dict):
            raise ManifestInvalid("Manifest must be a mapping", self.manifest_path)
        for key in self.MANIFEST_SCHEMA["required"]:
            if key not in loaded:
                raise ManifestInvalid(f"Missing required key {key!r}", self.manifest_path)
        self._manifest = self._merge_with_defaults(loaded)
        self.validate()

    def _merge_with_defaults(self, manifest: dict[str, Any]) -> dict[str, Any]:
        result = copy.deepcopy(self.DEFAULT_MANIFEST)
        self._deep_merge(result, manifest)
        return result

    def _deep_merge(self, base: dict[str, Any], override: dict[str, Any]) -> None:
        """Deep merge override into base dictionary (in-place)."""
        for key, value in override.items():
            if key in base and isinstance(base[key], dict) and isinstance(value, dict):
                self._deep_merge(base[key], value)
            else:
                base[key] = value

    def get(self, key: str, default: Any = None) -> Any:
        """Get manifest value using dot notation.

        Example:
            >>> manifest.get('reward.weights.comfort')
            10.0
        """
        value: Any = self._manifest
        for k in key.split("."):
            if isinstance(value, dict):
                value = value.get(k)
            else:
                return default
            if value is None:
                return default
        return value

    def validate(self) -> bool:
        """Validate manifest against schema.

        Raises:
            ManifestInvalid: If the manifest is invalid
        """
        try:
            validate(instance=self._manifest, schema=self.MANIFEST_SCHEMA)
            return True
        except ValidationError as e:
            where = ".".join(str(p) for p in e.absolute_path) or "<root>"
            raise ManifestInvalid(f"{where}: {e.message}", self.manifest_path)

    def resolve_path(self, relative: Union[str, Path]) -> Path:
        """Resolve a path given inside the manifest."""
        path = Path(relative)
        if path.is_absolute():
            return path
        return self.manifest_path.parent / path

    def to_dict(self) -> dict[str, Any]:
        """Get the merged manifest as a dictionary copy."""
        return copy.deepcopy(self._manifest)


def dump_manifest_patch(values: dict[str, Any], path: Union[str, Path],
                        header: Optional[str] = None) -> None:
    """Write a partial manifest (for example calibrated parameters) as YAML."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        if header:
            for line in header.splitlines():
                f.write(f"# {line}\n")
        yaml.dump(values, f, default_flow_style=False, sort_keys=False, allow_unicode=True)


def load_manifest_patch(path: Union[str, Path]) -> dict[str, Any]:
    """Read a partial manifest written by :func:`dump_manifest_patch`.

    Raises:
        ManifestInvalid: If the file is missing or not a YAML mapping
    """
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as f:
            loaded = yaml.safe_load(f) or {}
    except OSError as e:
        raise ManifestInvalid(f"Cannot read manifest patch: {e.strerror}", path)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        raise ManifestInvalid(f"YAML parse error: {e}", path, mark.line + 1 if mark else None)
    if not isinstance(loaded, dict):
        raise ManifestInvalid("Manifest patch must be a mapping", path)
    return loaded
