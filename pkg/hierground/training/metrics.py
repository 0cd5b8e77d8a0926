"""Evaluation metrics over plain numpy boxes."""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any, Union

import numpy as np

from hierground.errors import InputError

BoxLike = Union[Sequence[float], np.ndarray]


def box_iou(a: BoxLike, b: BoxLike) -> float:
    """IoU of two (cx, cy, w, h) boxes; zero-area pairs give 0."""
    ax, ay, aw, ah = (float(v) for v in np.asarray(a, dtype=np.float64).reshape(4))
    bx, by, bw, bh = (float(v) for v in np.asarray(b, dtype=np.float64).reshape(4))
    iw = max(0.0, min(ax + aw / 2, bx + bw / 2) - max(ax - aw / 2, bx - bw / 2))
    ih = max(0.0, min(ay + ah / 2, by + bh / 2) - max(ay - ah / 2, by - bh / 2))
    inter = iw * ih
    union = aw * ah + bw * bh - inter
    if union <= 0.0:
        return 0.0
    return inter / union


def _check_pairs(predictions: Sequence[BoxLike], gts: Sequence[BoxLike]) -> None:
    if len(predictions) == 0 or len(gts) == 0:
        raise InputError("cannot compute a metric over an empty box list")
    if len(predictions) != len(gts):
        raise InputError(f"{len(predictions)} predictions but {len(gts)} ground-truth boxes")


def prec_at_iou(
    predictions: Sequence[BoxLike],
    gts: Sequence[BoxLike],
    threshold: float = 0.5,
    inclusive: bool = False,
) -> float:
    """Fraction of pairs whose IoU surpasses ``threshold`` (or reaches it when ``inclusive``)."""
    _check_pairs(predictions, gts)
    ious = [box_iou(p, g) for p, g in zip(predictions, gts)]
    hits = sum(1 for v in ious if (v >= threshold if inclusive else v > threshold))
    return hits / len(ious)


def mean_iou(predictions: Sequence[BoxLike], gts: Sequence[BoxLike]) -> float:
    _check_pairs(predictions, gts)
    return float(np.mean([box_iou(p, g) for p, g in zip(predictions, gts)]))


@dataclass
class MetricReport:
    """Aggregate metrics for one split.

    Attributes:
        run_id: Identifier of the evaluated run.
        split: Split name.
        prec: Precision at the configured IoU threshold.
        mean_iou: Mean IoU over all samples.
        count: Number of samples.
        per_depth: Expression depth -> (precision, count).
        attn_nondecreasing_frac: Fraction of correctly grounded multi-object
            scenes whose attention mass inside the target does not drop from
            the first to the last hierarchy level (None when not measured).
    """

    run_id: str
    split: str
    prec: float
    mean_iou: float
    count: int
    per_depth: dict[int, tuple[float, int]] = field(default_factory=dict)
    attn_nondecreasing_frac: float | None = None
    depths: tuple[int, ...] = (1, 2, 3)

    def csv_header(self) -> list[str]:
        header = ["run_id", "split", "prec_at_0.5", "mean_iou"]
        for d in self.depths:
            header += [f"prec_depth{d}", f"count_depth{d}"]
        header.append("attn_nondecreasing_frac")
        return header

    def csv_row(self) -> list[str]:
        row = [self.run_id, self.split, f"{self.prec:.6f}", f"{self.mean_iou:.6f}"]
        for d in self.depths:
            prec, count = self.per_depth.get(d, (float("nan"), 0))
            row += [f"{prec:.6f}", str(count)]
        frac = self.attn_nondecreasing_frac
        row.append("" if frac is None else f"{frac:.6f}")
        return row

    def to_dict(self) -> dict[str, Any]:
        return {
            "run_id": self.run_id,
            "split": self.split,
            "prec_at_0.5": self.prec,
            "mean_iou": self.mean_iou,
            "count": self.count,
            "per_depth": {str(d): {"prec": p, "count": n} for d, (p, n) in sorted(self.per_depth.items())},
            "attn_nondecreasing_frac": self.attn_nondecreasing_frac,
        }


def build_report(
    run_id: str,
    split: str,
    predictions: Sequence[BoxLike],
    gts: Sequence[BoxLike],
    depths: Sequence[int],
    threshold: float = 0.5,
    inclusive: bool = False,
    attn_nondecreasing_frac: float | None = None,
    depth_values: Sequence[int] = (1, 2, 3),
) -> MetricReport:
    """Overall and per-depth precision for aligned prediction/ground-truth lists."""
    _check_pairs(predictions, gts)
    if len(depths) != len(gts):
        raise InputError(f"{len(depths)} depth labels for {len(gts)} samples")
    per_depth: dict[int, tuple[float, int]] = {}
    grouped: Mapping[int, list[int]] = {d: [i for i, v in enumerate(depths) if v == d] for d in depth_values}
    for d, idx in grouped.items():
        if idx:
            prec = prec_at_iou([predictions[i] for i in idx], [gts[i] for i in idx], threshold, inclusive)
            per_depth[d] = (prec, len(idx))
    return MetricReport(
        run_id=run_id,
        split=split,
        prec=prec_at_iou(predictions, gts, threshold, inclusive),
        mean_iou=mean_iou(predictions, gts),
        count=len(gts),
        per_depth=per_depth,
        attn_nondecreasing_frac=attn_nondecreasing_frac,
        depths=tuple(depth_values),
    )
