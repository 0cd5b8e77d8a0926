"""JSON output formatter."""

from __future__ import annotations

import json
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from hierground.training.ablation import AblationTable
    from hierground.training.metrics import MetricReport
    from hierground.training.sweep import SweepTable
    from hierground.training.trainer import TrainingResult
    from hierground.viz.visualize import VisualizationResult


class JsonFormatter:
    """Format run results as JSON."""

    def format_metrics(self, report: MetricReport) -> str:
        return json.dumps(report.to_dict(), indent=2)

    def format_ablation(self, table: AblationTable) -> str:
        return json.dumps(table.to_dict(), indent=2)

    def format_sweep(self, table: SweepTable) -> str:
        return json.dumps(table.to_dict(), indent=2)

    def format_training(self, result: TrainingResult) -> str:
        return json.dumps(result.to_dict(), indent=2)

    def format_visualization(self, result: VisualizationResult) -> str:
        return json.dumps(result.to_dict(), indent=2)
