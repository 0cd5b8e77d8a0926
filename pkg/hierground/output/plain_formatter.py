"""Plain text output formatter."""

from __future__ import annotations

from typing import TYPE_CHECKING

from hierground.output._utils import fmt_mean_std as _fmt_mean_std
from hierground.output._utils import fmt_score as _fmt_score

if TYPE_CHECKING:
    from hierground.training.ablation import AblationTable
    from hierground.training.metrics import MetricReport
    from hierground.training.sweep import SweepTable
    from hierground.training.trainer import TrainingResult
    from hierground.viz.visualize import VisualizationResult


class PlainFormatter:
    """Format run results as plain text."""

    def format_metrics(self, report: MetricReport) -> str:
        lines = []
        lines.append(f"Run: {report.run_id}")
        lines.append(f"Split: {report.split} ({report.count} scenes)")
        lines.append(f"Prec@0.5: {_fmt_score(report.prec)}")
        lines.append(f"Mean IoU: {_fmt_score(report.mean_iou)}")
        for depth in report.depths:
            prec, count = report.per_depth.get(depth, (float("nan"), 0))
            lines.append(f"  depth {depth}: {_fmt_score(prec)} over {count} scenes")
        lines.append(f"Attention non-decreasing: {_fmt_score(report.attn_nondecreasing_frac)}")
        return "\n".join(lines)

    def format_ablation(self, table: AblationTable) -> str:
        lines = []
        for row in table.rows:
            lines.append(f"  {row.name:<14s} {_fmt_mean_std(row.mean, row.std)}")
        for weaker, stronger in table.inversions:
            lines.append(f"  [WARN] {stronger} scored below {weaker}")
        if table.acceptance is not None:
            lines.append("Acceptance:")
            for check in table.acceptance.checks:
                lines.append(
                    f"  {check.name:<26s} {_fmt_score(check.value)} (>= {check.threshold:.2f}) {check.status.upper()}"
                )
        return "\n".join(lines)

    def format_sweep(self, table: SweepTable) -> str:
        lines = [f"Sweep: {table.param}"]
        for value, summary in table.rows:
            lines.append(f"  {table.param}={value}: {_fmt_mean_std(summary.mean, summary.std)}")
        return "\n".join(lines)

    def format_training(self, result: TrainingResult) -> str:
        lines = []
        for e in result.epochs:
            lines.append(
                f"  epoch {e.epoch:>3d}: loss {e.total:.5f} (L_Q {e.l_q:.5f}, L_cons {e.l_cons:.5f})"
                f" val {_fmt_score(e.val_prec)}"
            )
        lines.append(f"Best val Prec@0.5 {_fmt_score(result.best_val_prec)} at epoch {result.best_epoch}")
        lines.append(f"Checkpoint: {result.checkpoint_path}")
        return "\n".join(lines)

    def format_visualization(self, result: VisualizationResult) -> str:
        lines = [f"  {path}" for path in result.files]
        masses = ", ".join(_fmt_score(m) for m in result.attention_mass)
        lines.append(f"Attention mass in target per level: {masses or '-'}")
        return "\n".join(lines)
