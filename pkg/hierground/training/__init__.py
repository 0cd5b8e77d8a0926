"""Losses, metrics, training, evaluation, ablations and sweeps."""

from hierground.training.losses import LossBreakdown, giou, l1_box, total_loss
from hierground.training.metrics import MetricReport, box_iou, mean_iou, prec_at_iou

__all__ = [
    "LossBreakdown",
    "MetricReport",
    "box_iou",
    "giou",
    "l1_box",
    "mean_iou",
    "prec_at_iou",
    "total_loss",
]
