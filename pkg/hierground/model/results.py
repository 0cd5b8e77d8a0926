"""Result types produced by the grounding model's forward pass."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from hierground.autodiff.tensor import Tensor


@dataclass
class VisualTokens:
    """Visual token grid F_vt, ``grid_h * grid_w`` rows of width C."""

    features: Tensor
    grid_h: int
    grid_w: int

    @property
    def num_tokens(self) -> int:
        return self.grid_h * self.grid_w


@dataclass
class TextTokens:
    features: Tensor
    token_ids: tuple[int, ...]

    @property
    def num_tokens(self) -> int:
        return len(self.token_ids)


@dataclass
class AlignedVisual:
    """Globally aligned visual features and the per-token weights that scaled them."""

    features: Tensor
    weights: Tensor
    similarity: Tensor | None = None


@dataclass
class HierarchyTrace:
    """Per-level outputs of the hierarchical matcher.

    Attributes:
        features: F~^0 .. F~^L; features[0] is the aligned input.
        attention: Head-averaged HM attention (N_v x N_s) per level 1..L.
        received: Attention received by each visual token in the layer's
            second attention, averaged over heads and queries (N_v) per level.
    """

    features: list[Tensor]
    attention: list[np.ndarray] = field(default_factory=list)
    received: list[np.ndarray] = field(default_factory=list)

    @property
    def num_levels(self) -> int:
        return len(self.features) - 1

    @property
    def final(self) -> Tensor:
        return self.features[-1]


@dataclass
class BoxState:
    """Normalized (cx, cy, w, h) box; ``box`` is a differentiable 4-vector."""

    box: Tensor

    @classmethod
    def zeros(cls) -> BoxState:
        return cls(Tensor(np.zeros(4)))

    @classmethod
    def of(cls, cx: float, cy: float, w: float, h: float) -> BoxState:
        return cls(Tensor(np.array([cx, cy, w, h], dtype=np.float64)))

    def as_tuple(self) -> tuple[float, float, float, float]:
        cx, cy, w, h = (float(v) for v in self.box.data.reshape(-1))
        return cx, cy, w, h


@dataclass
class GroundingPrediction:
    """Boxes regressed over N iterations of position correction.

    Attributes:
        boxes: B_1 .. B_N from the box head, each a 4-vector tensor.
        layer_histories: Per iteration, b^0 .. b^L; empty lists when box
            feedback is disabled.
        queries: Final target query of each iteration.
    """

    boxes: list[Tensor]
    layer_histories: list[list[Tensor]] = field(default_factory=list)
    queries: list[Tensor] = field(default_factory=list)
    hsa_attention: list[list[np.ndarray]] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.boxes)

    @property
    def final_box(self) -> Tensor:
        return self.boxes[-1]

    def final_layer_boxes(self) -> list[Tensor]:
        return [history[-1] for history in self.layer_histories if len(history) > 1]

    def trajectory(self) -> list[dict[str, Any]]:
        return [
            {
                "iteration": n + 1,
                "layer_boxes": [[float(v) for v in b.data] for b in history],
                "box": [float(v) for v in self.boxes[n].data],
            }
            for n, history in enumerate(self.layer_histories or [[] for _ in self.boxes])
        ]


@dataclass
class GroundingOutput:
    """Everything one forward pass produces, kept for losses and visualization."""

    prediction: GroundingPrediction
    visual: VisualTokens
    text: TextTokens
    aligned: AlignedVisual
    trace: HierarchyTrace
    num_levels: int

    @property
    def box(self) -> np.ndarray:
        return self.prediction.final_box.data.copy()
