"""Progressive position correction.

A target query is threaded through shared PPC layers once per hierarchy and
the whole stack is iterated N times. Each layer aggregates hierarchy-specific
text and visual context into the query (HSA), corrects a running box with a
sigmoid delta, and feeds a sinusoidal embedding of the box back into the query.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np

from hierground.autodiff.nn import MLP, Linear, Module, MultiHeadAttention, Parameter
from hierground.autodiff.tensor import Tensor, concat
from hierground.errors import ConfigurationError, InputError
from hierground.model.attention import HierarchicalMaskAttention
from hierground.model.results import GroundingPrediction
from hierground.text.chunker import HierMask, empty_mask

logger = logging.getLogger("hierground.model.locator")

BOX_MODES = ("centered", "literal")
BOX_CARRY = ("reset", "accumulate")


def box_frequencies(dim: int, base: float = 10000.0) -> np.ndarray:
    """Inverse frequencies for one coordinate's ``dim // 4`` wide encoding."""
    if dim % 4:
        raise ConfigurationError(f"box embedding needs dim divisible by 4, got {dim}")
    width = dim // 4
    pairs = (width + 1) // 2
    return base ** (-2.0 * np.arange(pairs) / width)


def box_position_encoding(box: Tensor, dim: int) -> Tensor:
    """Differentiable sin/cos encoding of (cx, cy, w, h) as a (1, dim) row.

    Each coordinate v expands to PE(v)[2k] = sin(v / 10000^(2k/(dim/4))) and
    PE(v)[2k+1] = cos(.), and the four encodings are concatenated.
    """
    width = dim // 4
    freqs = box_frequencies(dim)
    angles = box.reshape(4, 1) * freqs.reshape(1, -1)
    pairs = len(freqs)
    interleaved = concat([angles.sin().reshape(4, pairs, 1), angles.cos().reshape(4, pairs, 1)], axis=2)
    per_coord = interleaved.reshape(4, 2 * pairs)
    if 2 * pairs != width:
        per_coord = per_coord[:, :width]
    return per_coord.reshape(1, dim)


class PPCLayer(Module):
    """Hierarchy-specific aggregation plus optional box correction and feedback."""

    def __init__(self, dim: int, heads: int, rng: np.random.Generator, use_box_feedback: bool = True):
        self.dim = dim
        self.use_box_feedback = use_box_feedback
        self.hm_attn = HierarchicalMaskAttention(dim, heads, rng)
        self.mh_attn = MultiHeadAttention(dim, heads, rng)
        if use_box_feedback:
            self.box_mlp = MLP([dim, dim, 4], rng)
            self.theta = Linear(dim, dim, rng)

    def hsa(
        self,
        query: Tensor,
        text: Tensor,
        current: HierMask,
        previous: HierMask,
        visual: Tensor,
        final: Tensor,
        hier_lambda: float,
        mask_mode: str = "additive",
    ) -> tuple[Tensor, Tensor]:
        """Return Q^l (1 x C) and the HM Attn weights over text positions."""
        textual, weights = self.hm_attn(query, text, current, previous, hier_lambda, mask_mode)
        return self.mh_attn(textual, final, visual), weights

    def correct_box(self, q: Tensor, previous_box: Tensor, box_mode: str = "centered") -> Tensor:
        delta = self.box_mlp(q).sigmoid().reshape(4)
        if box_mode == "literal":
            return previous_box + delta
        if box_mode == "centered":
            return (previous_box + delta - 0.5).clip(0.0, 1.0)
        raise ConfigurationError(f"box_mode must be one of {BOX_MODES}, got {box_mode!r}")

    def embed_box(self, box: Tensor) -> Tensor:
        return self.theta(box_position_encoding(box, self.dim))

    @staticmethod
    def fuse(box_embedding: Tensor, q: Tensor) -> Tensor:
        return box_embedding + q

    def forward(
        self,
        query: Tensor,
        box: Tensor | None,
        text: Tensor,
        current: HierMask,
        previous: HierMask,
        visual: Tensor,
        final: Tensor,
        hier_lambda: float,
        mask_mode: str = "additive",
        box_mode: str = "centered",
    ) -> tuple[Tensor, Tensor | None, Tensor]:
        q, weights = self.hsa(query, text, current, previous, visual, final, hier_lambda, mask_mode)
        if not self.use_box_feedback:
            return q, None, weights
        box = self.correct_box(q, box, box_mode)
        return self.fuse(self.embed_box(box), q), box, weights


class ProgressivePositionCorrector(Module):
    """Shared PPC layer iterated over hierarchies and refinement rounds.

    The target query persists from one iteration to the next. With
    ``box_carry="reset"`` the box restarts from zero every iteration; with
    ``"accumulate"`` it continues from the previous iteration's last box.
    """

    def __init__(self, dim: int, heads: int, rng: np.random.Generator, use_box_feedback: bool = True):
        self.query_init = Parameter(rng.normal(0.0, 1.0, size=(1, dim)))
        self.layer = PPCLayer(dim, heads, rng, use_box_feedback=use_box_feedback)
        self.head = MLP([dim, dim, 4], rng)

    @property
    def use_box_feedback(self) -> bool:
        return self.layer.use_box_feedback

    def forward(
        self,
        text: Tensor,
        masks: Sequence[HierMask],
        visual: Tensor,
        final: Tensor,
        iterations: int,
        hier_lambda: float,
        mask_mode: str = "additive",
        box_mode: str = "centered",
        box_carry: str = "reset",
    ) -> GroundingPrediction:
        if iterations < 1:
            raise ConfigurationError(f"iterations must be >= 1, got {iterations}")
        if not masks:
            raise InputError("position correction needs at least one mask")
        if box_carry not in BOX_CARRY:
            raise ConfigurationError(f"box_carry must be one of {BOX_CARRY}, got {box_carry!r}")

        prediction = GroundingPrediction(boxes=[])
        query: Tensor = self.query_init
        box = Tensor(np.zeros(4))
        for _ in range(iterations):
            if box_carry == "reset" or not self.use_box_feedback:
                box = Tensor(np.zeros(4))
            history = [box] if self.use_box_feedback else []
            attention = []
            previous = empty_mask(text.shape[0])
            for current in masks:
                query, new_box, weights = self.layer(
                    query, box, text, current, previous, visual, final, hier_lambda, mask_mode, box_mode
                )
                attention.append(weights.data.mean(axis=0))
                if new_box is not None:
                    box = new_box
                    history.append(box)
                previous = current
            prediction.boxes.append(self.head(query).sigmoid().reshape(4))
            prediction.layer_histories.append(history)
            prediction.queries.append(query)
            prediction.hsa_attention.append(attention)
        return prediction
