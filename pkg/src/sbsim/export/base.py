"""Base class and atomic file helpers for output artifacts."""

import csv
import json
import os
from abc import ABC, abstractmethod
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path
from typing import Any


def write_csv_atomic(
    file_path: Path, fieldnames: Sequence[str], rows: Iterable[Mapping[str, Any]]
) -> None:
    """Write CSV file atomically using temporary file and rename.

    Floats are written with ``repr`` so values read back bit-for-bit.

    Args:
        file_path: Target file path
        fieldnames: CSV field names
        rows: Row dictionaries
    """
    file_path = Path(file_path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    temp_file = file_path.with_suffix(file_path.suffix + ".tmp")

    try:
        with open(temp_file, "w", newline="", encoding="utf-8") as f:
            writer = csv.DictWriter(f, fieldnames=list(fieldnames), lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)
            f.flush()
            os.fsync(f.fileno())
        temp_file.replace(file_path)
    except Exception:
        if temp_file.exists():
            temp_file.unlink()
        raise


def write_text_atomic(file_path: Path, text: str) -> None:
    """Write a text file atomically."""
    file_path = Path(file_path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    temp_file = file_path.with_suffix(file_path.suffix + ".tmp")
    try:
        with open(temp_file, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
            f.flush()
            os.fsync(f.fileno())
        temp_file.replace(file_path)
    except Exception:
        if temp_file.exists():
            temp_file.unlink()
        raise


def write_json_atomic(file_path: Path, data: Any) -> None:
    """Write JSON with sorted keys and a trailing newline."""
    write_text_atomic(file_path, json.dumps(data, indent=2, sort_keys=True, allow_nan=True) + "\n")


class ArtifactWriter(ABC):
    """Base class for everything a command writes to its output directory."""

    def __init__(self, output_dir: Path):
        """Initialize writer.

        Args:
            output_dir: Directory the artifacts are written into
        """
        self.output_dir = Path(output_dir)

    @abstractmethod
    def write(self, *args: Any, **kwargs: Any) -> list[Path]:
        """Write the artifact(s).

        Returns:
            Paths of the files written
        """
        pass

    def ensure_output_dir(self) -> None:
        """Ensure the output directory exists."""
        self.output_dir.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        return self.output_dir / name
