"""Artifacts of an N-step evaluation."""

from collections.abc import Sequence
from datetime import datetime
from pathlib import Path
from typing import Any

from sbsim.calib.evaluation import FidelityReport
from sbsim.export.base import ArtifactWriter, write_csv_atomic, write_json_atomic
from sbsim.export.drift import DriftWriter
from sbsim.export.heatmap import HeatmapWriter


class FidelityWriter(ArtifactWriter):
    """Write ``report.json``, ``zone_errors.csv``, ``epsilon.csv``, drift and heatmaps.

    Heatmaps are skipped when the run diverged (there is no final grid).
    """

    def write(  # type: ignore[override]
        self, report: FidelityReport, timestamps: Sequence[datetime]
    ) -> list[Path]:
        """Write every evaluation artifact.

        Args:
            report: Evaluation outcome
            timestamps: Timestamps of the scored records, one per step

        Returns:
            Paths of the files written
        """
        self.ensure_output_dir()
        scored = len(report.epsilon)
        summary: dict[str, Any] = report.summary()
        summary["start"] = timestamps[0].isoformat()
        summary["scored_at"] = timestamps[report.n - 1].isoformat()

        report_path = self.path("report.json")
        write_json_atomic(report_path, summary)

        zone_path = self.path("zone_errors.csv")
        final_real = report.real[report.n - 1]
        final_sim = report.simulated[-1] if len(report.simulated) == report.n else {}
        write_csv_atomic(
            zone_path,
            ["zone", "real", "simulated", "abs_error"],
            [
                {
                    "zone": zone,
                    "real": repr(final_real[zone]),
                    "simulated": repr(final_sim[zone]) if zone in final_sim else "",
                    "abs_error": repr(error),
                }
                for zone, error in report.zone_errors.items()
            ],
        )

        epsilon_path = self.path("epsilon.csv")
        write_csv_atomic(
            epsilon_path,
            ["step", "timestamp", "epsilon"],
            [
                {"step": k, "timestamp": timestamps[k].isoformat(), "epsilon": repr(e)}
                for k, e in enumerate(report.epsilon)
            ],
        )

        written = [report_path, zone_path, epsilon_path]
        written += DriftWriter(self.output_dir).write(
            timestamps[:scored], report.real[:scored], report.simulated[:scored], report.epsilon
        )
        if report.final_state is not None:
            written += HeatmapWriter(self.output_dir).write(report.final_state.grids, final_real)
        return written
