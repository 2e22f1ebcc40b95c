"""Per-step distribution of measured and simulated zone temperatures."""

from collections.abc import Mapping, Sequence
from datetime import datetime
from pathlib import Path
from typing import Any

import numpy as np

from sbsim.export.base import ArtifactWriter, write_csv_atomic

STATISTICS = ("min", "q1", "median", "q3", "max")

DRIFT_FIELDS = [
    "step",
    "timestamp",
    *(f"real_{s}" for s in STATISTICS),
    *(f"sim_{s}" for s in STATISTICS),
    "epsilon",
]


def distribution(temperatures: Mapping[str, float]) -> dict[str, float]:
    """Min, quartiles (linear interpolation), median and max."""
    values = np.array(sorted(temperatures.values()), dtype=np.float64)
    q1, median, q3 = np.quantile(values, [0.25, 0.5, 0.75])
    return {
        "min": float(values[0]),
        "q1": float(q1),
        "median": float(median),
        "q3": float(q3),
        "max": float(values[-1]),
    }


def drift_rows(
    timestamps: Sequence[datetime],
    real: Sequence[Mapping[str, float]],
    simulated: Sequence[Mapping[str, float]],
    epsilon: Sequence[float],
) -> list[dict[str, Any]]:
    rows = []
    for step, (t, r, s, e) in enumerate(zip(timestamps, real, simulated, epsilon)):
        row: dict[str, Any] = {"step": step, "timestamp": t.isoformat(), "epsilon": repr(e)}
        for prefix, temperatures in (("real", r), ("sim", s)):
            for name, value in distribution(temperatures).items():
                row[f"{prefix}_{name}"] = repr(value)
        rows.append(row)
    return rows


class DriftWriter(ArtifactWriter):
    """Write ``drift.csv``."""

    def write(  # type: ignore[override]
        self,
        timestamps: Sequence[datetime],
        real: Sequence[Mapping[str, float]],
        simulated: Sequence[Mapping[str, float]],
        epsilon: Sequence[float],
    ) -> list[Path]:
        self.ensure_output_dir()
        path = self.path("drift.csv")
        write_csv_atomic(path, DRIFT_FIELDS, drift_rows(timestamps, real, simulated, epsilon))
        return [path]
