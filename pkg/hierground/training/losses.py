"""Box regression losses on the gradient tape."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from hierground.autodiff.tensor import ArrayLike, Tensor, as_tensor
from hierground.model.results import BoxState, GroundingPrediction


def _box_tensor(box: BoxState | ArrayLike) -> Tensor:
    if isinstance(box, BoxState):
        return box.box.reshape(4)
    return as_tensor(box).reshape(4)


def l1_box(a: BoxState | ArrayLike, b: BoxState | ArrayLike) -> Tensor:
    """Sum of absolute (cx, cy, w, h) differences."""
    return (_box_tensor(a) - _box_tensor(b)).abs().sum()


def _corners(box: Tensor) -> tuple[Tensor, Tensor, Tensor, Tensor]:
    cx, cy, w, h = box[0], box[1], box[2], box[3]
    return cx - w * 0.5, cy - h * 0.5, cx + w * 0.5, cy + h * 0.5


def giou(a: BoxState | ArrayLike, b: BoxState | ArrayLike) -> Tensor:
    """Generalized IoU of two center-size boxes, in (-1, 1].

    Two zero-area boxes give 0.
    """
    a, b = _box_tensor(a), _box_tensor(b)
    ax1, ay1, ax2, ay2 = _corners(a)
    bx1, by1, bx2, by2 = _corners(b)
    inter_w = (ax2.minimum(bx2) - ax1.maximum(bx1)).clip(0.0, None)
    inter_h = (ay2.minimum(by2) - ay1.maximum(by1)).clip(0.0, None)
    inter = inter_w * inter_h
    union = a[2] * a[3] + b[2] * b[3] - inter
    if union.item() <= 0.0:
        return (a.sum() + b.sum()) * 0.0
    hull = (ax2.maximum(bx2) - ax1.minimum(bx1)) * (ay2.maximum(by2) - ay1.minimum(by1))
    return inter / union - (hull - union) / hull


@dataclass
class LossBreakdown:
    """Query loss, consistency loss and their sum for one sample.

    Attributes:
        l_q: Sum over iterations of lambda1 * L1 + lambda2 * (1 - GIoU) on B_n.
        l_cons: Sum over iterations of L1 between the ground truth and b_n^L.
        total: l_q + l_cons.
        per_iteration: Float values of each iteration's terms.
    """

    l_q: Tensor
    l_cons: Tensor
    total: Tensor
    per_iteration: list[dict[str, float]] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "total": self.total.item(),
            "l_q": self.l_q.item(),
            "l_cons": self.l_cons.item(),
            "per_iteration": self.per_iteration,
        }


def total_loss(
    prediction: GroundingPrediction,
    gt: BoxState | ArrayLike,
    lambda1: float,
    lambda2: float,
) -> LossBreakdown:
    gt = _box_tensor(gt)
    l_q: Tensor = Tensor(0.0)
    l_cons: Tensor = Tensor(0.0)
    terms = []
    for n, box in enumerate(prediction.boxes):
        l1 = l1_box(gt, box)
        g = giou(gt, box)
        l_q = l_q + l1 * lambda1 + (1.0 - g) * lambda2
        row = {"l1": l1.item(), "giou": g.item()}
        history = prediction.layer_histories[n] if n < len(prediction.layer_histories) else []
        if len(history) > 1:
            cons = l1_box(gt, history[-1])
            l_cons = l_cons + cons
            row["cons"] = cons.item()
        terms.append(row)
    return LossBreakdown(l_q=l_q, l_cons=l_cons, total=l_q + l_cons, per_iteration=terms)
