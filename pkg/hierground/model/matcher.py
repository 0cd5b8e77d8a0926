"""Cross-modal hierarchical matching: one shared layer applied per phrase hierarchy."""

from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np

from hierground.autodiff.nn import Module, MultiHeadAttention
from hierground.autodiff.tensor import Tensor
from hierground.errors import InputError
from hierground.model.attention import HierarchicalMaskAttention
from hierground.model.results import AlignedVisual, HierarchyTrace, TextTokens, VisualTokens
from hierground.text.chunker import HierMask, empty_mask

logger = logging.getLogger("hierground.model.matcher")


class CMHMLayer(Module):
    """HM Attn, residual fusion with the previous level, then attention over visual tokens.

    Queries and keys of the second attention come from the fused features,
    values from the visual tokens.
    """

    def __init__(self, dim: int, heads: int, rng: np.random.Generator):
        self.hm_attn = HierarchicalMaskAttention(dim, heads, rng)
        self.mh_attn = MultiHeadAttention(dim, heads, rng)

    def forward(
        self,
        previous_features: Tensor,
        visual: VisualTokens,
        text: TextTokens,
        current: HierMask,
        previous: HierMask,
        hier_lambda: float,
        mask_mode: str = "additive",
    ) -> tuple[Tensor, Tensor, Tensor]:
        """Return F~^l plus the HM Attn weights and the second attention's weights."""
        matched, hm_weights = self.hm_attn(previous_features, text.features, current, previous, hier_lambda, mask_mode)
        fused = matched + previous_features
        out, weights = self.mh_attn(fused, fused, visual.features, return_weights=True)
        return out, hm_weights, weights


class CrossModalHierarchicalMatcher(Module):
    def __init__(self, dim: int, heads: int, rng: np.random.Generator):
        self.layer = CMHMLayer(dim, heads, rng)

    def forward(
        self,
        aligned: AlignedVisual,
        visual: VisualTokens,
        text: TextTokens,
        masks: Sequence[HierMask],
        hier_lambda: float,
        mask_mode: str = "additive",
    ) -> HierarchyTrace:
        if not masks:
            raise InputError("hierarchical matching needs at least one mask")
        trace = HierarchyTrace(features=[aligned.features])
        previous = empty_mask(text.num_tokens)
        x = aligned.features
        for current in masks:
            x, hm_weights, weights = self.layer(x, visual, text, current, previous, hier_lambda, mask_mode)
            trace.features.append(x)
            trace.attention.append(hm_weights.data.mean(axis=0))
            trace.received.append(weights.data.mean(axis=(0, 1)))
            previous = current
        logger.debug("matched %d hierarchy levels", len(masks))
        return trace
