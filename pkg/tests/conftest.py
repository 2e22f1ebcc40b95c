"""Pytest configuration and shared fixtures."""

import tempfile
from pathlib import Path

import pytest  # type: ignore[import-not-found]

from sbsim.building.config import BuildingConfig, load_building_config, make_building_config
from sbsim.building.devices import parse_devices
from sbsim.building.floorplan import parse_floorplan

SAMPLES_DIR = Path(__file__).resolve().parent.parent / "samples" / "two_zone"

SMALL_FLOORPLAN = """\
floor 1
OOOOOOOOO
OXXXXXXXO
OXAAxBBXO
OXAAxBBXO
OXXXXXXXO
OOOOOOOOO
"""

SMALL_DEVICES = """\
device vav-a type vav zone A diffuser 2,2 design_flow=0.02
device vav-b type vav zone B diffuser 3,6 design_flow=0.02
device ahu-1 type ahu
device boiler-1 type boiler
device chiller-1 type chiller
"""


def pytest_configure(config: pytest.Config) -> None:
    """Configure pytest."""
    config.addinivalue_line("markers", "integration: Integration tests")
    config.addinivalue_line("markers", "slow: Slow tests")


@pytest.fixture  # type: ignore[misc]
def temp_dir() -> Path:
    """Create temporary directory for tests."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture  # type: ignore[misc]
def samples_dir() -> Path:
    """Directory of the two-zone sample building."""
    return SAMPLES_DIR


@pytest.fixture  # type: ignore[misc]
def sample_manifest() -> Path:
    """Manifest of the two-zone sample building."""
    return SAMPLES_DIR / "manifest.yml"


@pytest.fixture  # type: ignore[misc]
def sample_config() -> BuildingConfig:
    """Loaded two-zone sample building."""
    return load_building_config(SAMPLES_DIR / "manifest.yml")


@pytest.fixture  # type: ignore[misc]
def small_config() -> BuildingConfig:
    """A 6x9 two-zone building built in memory."""
    floor = parse_floorplan(SMALL_FLOORPLAN, "small.txt")
    devices = parse_devices(SMALL_DEVICES, source="small-devices.txt")
    return make_building_config([floor], devices, name="small")


@pytest.fixture  # type: ignore[misc]
def small_manifest(temp_dir: Path) -> Path:
    """Manifest of the small two-zone building, written to a temp directory."""
    (temp_dir / "small.txt").write_text(SMALL_FLOORPLAN)
    (temp_dir / "small-devices.txt").write_text(SMALL_DEVICES)
    path = temp_dir / "manifest.yml"
    path.write_text(
        "version: '1.0'\n"
        "name: small\n"
        "floors: [small.txt]\n"
        "devices: small-devices.txt\n"
        "simulation:\n"
        "  start: '2024-01-01T00:00:00'\n"
    )
    return path
