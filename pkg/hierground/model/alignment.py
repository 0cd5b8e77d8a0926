"""Global feature cross-modal alignment.

Text context is attended into every visual token, both sides are mapped into a
shared space, and each visual token is reweighted by a softmax over the
index-wise cosine similarity of the two.
"""

from __future__ import annotations

import numpy as np

from hierground.autodiff import functional as F
from hierground.autodiff.nn import Linear, Module, MultiHeadAttention
from hierground.autodiff.tensor import Tensor
from hierground.errors import ConfigurationError, ShapeError
from hierground.model.results import AlignedVisual, TextTokens, VisualTokens


class GlobalFeatureAlignment(Module):
    """Cross-modal attention followed by the global alignment layer.

    With ``enabled=False`` only the attention residual is kept
    (F_gv = F_vt + F_e) and the weights are reported as uniform.
    """

    def __init__(self, dim: int, heads: int, rng: np.random.Generator, enabled: bool = True):
        self.enabled = enabled
        self.cross_attn = MultiHeadAttention(dim, heads, rng)
        if enabled:
            self.shared_visual = Linear(dim, dim, rng, bias=False)
            self.shared_text = Linear(dim, dim, rng, bias=False)

    def cross_modal_attention(self, visual: VisualTokens, text: TextTokens) -> Tensor:
        if visual.features.shape[-1] != text.features.shape[-1]:
            raise ShapeError(f"feature widths differ: {visual.features.shape} vs {text.features.shape}")
        return self.cross_attn(visual.features, text.features, text.features)

    def global_alignment(
        self, visual_features: Tensor, text_context: Tensor, inverse_temperature: float
    ) -> AlignedVisual:
        if visual_features.shape != text_context.shape:
            raise ShapeError(f"alignment inputs differ: {visual_features.shape} vs {text_context.shape}")
        if inverse_temperature <= 0:
            raise ConfigurationError(f"inverse temperature must be positive, got {inverse_temperature}")
        similarity = F.cosine_similarity_rows(self.shared_visual(visual_features), self.shared_text(text_context))
        weights = F.softmax_lastdim(similarity * inverse_temperature)
        features = visual_features * weights.reshape(-1, 1)
        return AlignedVisual(features=features, weights=weights, similarity=similarity)

    def forward(self, visual: VisualTokens, text: TextTokens, inverse_temperature: float) -> AlignedVisual:
        context = self.cross_modal_attention(visual, text)
        if not self.enabled:
            n_v = visual.num_tokens
            return AlignedVisual(features=visual.features + context, weights=Tensor(np.full(n_v, 1.0 / n_v)))
        return self.global_alignment(visual.features, context, inverse_temperature)
