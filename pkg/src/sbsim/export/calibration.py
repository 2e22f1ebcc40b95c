"""Artifacts of a calibration run."""

from pathlib import Path
from typing import Any, Optional

from sbsim.building.config import PARAMETER_NAMES
from sbsim.calib.search import CalibrationResult
from sbsim.core.config import dump_manifest_patch
from sbsim.export.base import ArtifactWriter, write_csv_atomic, write_json_atomic

LOG_FIELDS = ["index", *PARAMETER_NAMES, "objective", "best_so_far"]


class CalibrationWriter(ArtifactWriter):
    """Write ``best_parameters.yml``, ``calibration_log.csv`` and ``comparison.json``.

    The parameter file is a manifest patch: its ``parameters`` block can be
    pasted into (or merged over) a building manifest.
    """

    def write(  # type: ignore[override]
        self, result: CalibrationResult, comparison: Optional[dict[str, Any]] = None
    ) -> list[Path]:
        self.ensure_output_dir()

        log_path = self.path("calibration_log.csv")
        rows = []
        for evaluation, best in zip(result.evaluations, result.running_best()):
            row: dict[str, Any] = {"index": evaluation.index}
            row.update({k: repr(v) for k, v in evaluation.parameters.to_dict().items()})
            row["objective"] = repr(evaluation.objective)
            row["best_so_far"] = repr(best)
            rows.append(row)
        write_csv_atomic(log_path, LOG_FIELDS, rows)
        written = [log_path]

        if not result.degenerate:
            params_path = self.path("best_parameters.yml")
            dump_manifest_patch(
                {"parameters": result.best_parameters.to_dict()},
                params_path,
                header=(
                    f"strategy: {result.strategy}, candidate {result.best_index}, "
                    f"MAE {result.best_objective!r} K over {result.interval.n} records "
                    f"from {result.interval.start.isoformat()}"
                ),
            )
            written.append(params_path)

        if comparison is not None:
            comparison_path = self.path("comparison.json")
            write_json_atomic(
                comparison_path,
                {
                    "strategy": result.strategy,
                    "budget": len(result.evaluations),
                    "best_index": result.best_index,
                    "best_objective": result.best_objective,
                    "degenerate": result.degenerate,
                    **comparison,
                },
            )
            written.append(comparison_path)
        return written
