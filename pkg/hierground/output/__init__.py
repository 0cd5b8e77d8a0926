"""Report formatters for metrics, ablation ladders, sweeps, training runs and visualizations."""

from __future__ import annotations

from typing import TYPE_CHECKING

from hierground.output.json_formatter import JsonFormatter
from hierground.output.plain_formatter import PlainFormatter
from hierground.output.table_formatter import TableFormatter

if TYPE_CHECKING:
    from typing import Protocol

    from hierground.training.ablation import AblationTable
    from hierground.training.metrics import MetricReport
    from hierground.training.sweep import SweepTable
    from hierground.training.trainer import TrainingResult
    from hierground.viz.visualize import VisualizationResult

    class Formatter(Protocol):
        def format_metrics(self, report: MetricReport) -> str: ...

        def format_ablation(self, table: AblationTable) -> str: ...

        def format_sweep(self, table: SweepTable) -> str: ...

        def format_training(self, result: TrainingResult) -> str: ...

        def format_visualization(self, result: VisualizationResult) -> str: ...


FORMATTERS = {
    "table": TableFormatter,
    "json": JsonFormatter,
    "plain": PlainFormatter,
}


def get_formatter(name: str = "table") -> Formatter:
    """Instantiate the formatter registered as ``name``."""
    try:
        return FORMATTERS[name]()
    except KeyError:
        raise ValueError(f"Unknown format: {name!r}. Available: {', '.join(FORMATTERS)}") from None
