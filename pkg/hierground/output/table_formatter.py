"""Rich table output formatter."""

from __future__ import annotations

from typing import TYPE_CHECKING

from hierground.output._utils import fmt_score as _fmt_score
from hierground.output.plain_formatter import PlainFormatter

if TYPE_CHECKING:
    from rich.table import Table

    from hierground.training.ablation import AblationTable
    from hierground.training.acceptance import AcceptanceReport
    from hierground.training.metrics import MetricReport
    from hierground.training.sweep import SweepTable
    from hierground.training.trainer import TrainingResult
    from hierground.viz.visualize import VisualizationResult


def _render(table: Table, footer: str | None = None) -> str:
    from io import StringIO

    from rich.console import Console

    buf = StringIO()
    console = Console(file=buf, force_terminal=True)
    console.print(table)
    if footer:
        console.print(f"\n[dim]{footer}[/dim]")
    return buf.getvalue()


class TableFormatter:
    """Format run results as rich tables."""

    def __init__(self):
        self._plain = PlainFormatter()

    def format_metrics(self, report: MetricReport) -> str:
        try:
            return self._format_metrics_rich(report)
        except ImportError:
            return self._plain.format_metrics(report)

    def _format_metrics_rich(self, report: MetricReport) -> str:
        from rich.table import Table

        table = Table(title=f"{report.run_id} on '{report.split}' ({report.count} scenes)")
        table.add_column("Depth", style="cyan")
        table.add_column("Scenes", justify="right")
        table.add_column("Prec@0.5", style="green", justify="right")

        for depth in report.depths:
            prec, count = report.per_depth.get(depth, (float("nan"), 0))
            table.add_row(str(depth), str(count), _fmt_score(prec))
        table.add_row("[bold]all[/bold]", str(report.count), f"[bold]{_fmt_score(report.prec)}[/bold]")

        footer = (
            f"Mean IoU {_fmt_score(report.mean_iou)}, "
            f"attention non-decreasing {_fmt_score(report.attn_nondecreasing_frac)}"
        )
        return _render(table, footer)

    def format_ablation(self, table: AblationTable) -> str:
        try:
            return self._format_ablation_rich(table)
        except ImportError:
            return self._plain.format_ablation(table)

    def _format_ablation_rich(self, ablation: AblationTable) -> str:
        from rich.table import Table

        inverted = {stronger for _, stronger in ablation.inversions}
        table = Table(title="Component Ablation")
        table.add_column("Configuration", style="cyan")
        table.add_column("Prec@0.5", style="green", justify="right")
        table.add_column("Std", justify="right")
        table.add_column("Seeds", style="dim", justify="right")

        for row in ablation.rows:
            name = f"[red]{row.name}[/red]" if row.name in inverted else row.name
            table.add_row(name, _fmt_score(row.mean), _fmt_score(row.std), str(len(row.values)))

        notes = []
        if ablation.inversions:
            notes.append(f"{len(ablation.inversions)} adjacent inversion(s)")
        if ablation.acceptance is not None:
            failed = [c.name for c in ablation.acceptance.failures]
            notes.append(f"acceptance failed: {', '.join(failed)}" if failed else "acceptance passed")
        text = _render(table, "; ".join(notes) or None)
        if ablation.acceptance is not None:
            text += _render(self._acceptance_table(ablation.acceptance))
        return text

    @staticmethod
    def _acceptance_table(report: AcceptanceReport) -> Table:
        from rich.table import Table

        table = Table(title="Acceptance")
        table.add_column("Check", style="cyan")
        table.add_column("Value", justify="right")
        table.add_column("Threshold", style="dim", justify="right")
        table.add_column("Status", justify="center")
        styles = {"pass": "green", "fail": "red", "skipped": "dim"}
        for check in report.checks:
            status = f"[{styles[check.status]}]{check.status}[/{styles[check.status]}]"
            table.add_row(check.name, _fmt_score(check.value), f"{check.threshold:.2f}", status)
        return table

    def format_sweep(self, table: SweepTable) -> str:
        try:
            return self._format_sweep_rich(table)
        except ImportError:
            return self._plain.format_sweep(table)

    def _format_sweep_rich(self, sweep: SweepTable) -> str:
        from rich.table import Table

        table = Table(title=f"Sweep over {sweep.param}")
        table.add_column("Value", style="cyan", justify="right")
        table.add_column("Prec@0.5", style="green", justify="right")
        table.add_column("Std", justify="right")

        for value, summary in sweep.rows:
            table.add_row(str(value), _fmt_score(summary.mean), _fmt_score(summary.std))
        return _render(table)

    def format_training(self, result: TrainingResult) -> str:
        try:
            return self._format_training_rich(result)
        except ImportError:
            return self._plain.format_training(result)

    def _format_training_rich(self, result: TrainingResult) -> str:
        from rich.table import Table

        table = Table(title=f"Training {result.output_dir}")
        table.add_column("Epoch", style="dim", justify="right")
        table.add_column("Loss", justify="right")
        table.add_column("L_Q", justify="right")
        table.add_column("L_cons", justify="right")
        table.add_column("Val Prec@0.5", style="green", justify="right")

        for e in result.epochs:
            table.add_row(str(e.epoch), f"{e.total:.5f}", f"{e.l_q:.5f}", f"{e.l_cons:.5f}", _fmt_score(e.val_prec))

        footer = f"Best epoch {result.best_epoch} -> {result.checkpoint_path}"
        return _render(table, footer)

    def format_visualization(self, result: VisualizationResult) -> str:
        try:
            return self._format_visualization_rich(result)
        except ImportError:
            return self._plain.format_visualization(result)

    def _format_visualization_rich(self, result: VisualizationResult) -> str:
        from rich.table import Table

        table = Table(title=f"Visualization in {result.output_dir}")
        table.add_column("Level", style="cyan", justify="right")
        table.add_column("Attention mass in target", style="green", justify="right")
        for level, mass in enumerate(result.attention_mass, 1):
            table.add_row(str(level), _fmt_score(mass))
        return _render(table, f"{len(result.files)} files written")
