"""Hierarchical-mask attention (HM Attn).

Scores on text positions enabled by the current mask but not the previous one
are kept; positions already enabled at the previous hierarchy are weakened by
``1 - 1/lambda``; positions outside the current mask are removed. In
``additive`` mode removal adds ``-LARGE`` before the softmax, in ``literal``
mode the score is only multiplied by zero.
"""

from __future__ import annotations

import numpy as np

from hierground.autodiff import functional as F
from hierground.autodiff.nn import Linear, Module
from hierground.autodiff.tensor import Tensor, matmul
from hierground.errors import ConfigurationError, ShapeError
from hierground.text.chunker import HierMask

MASK_MODES = ("additive", "literal")


def effective_score_terms(
    current: HierMask | np.ndarray,
    previous: HierMask | np.ndarray,
    hier_lambda: float,
    mask_mode: str = "additive",
) -> tuple[np.ndarray, np.ndarray]:
    """Per text position: multiplicative scale and additive offset applied to raw scores."""
    m_l = np.asarray(getattr(current, "bits", current), dtype=np.float64)
    m_prev = np.asarray(getattr(previous, "bits", previous), dtype=np.float64)
    if m_l.shape != m_prev.shape:
        raise ShapeError(f"mask lengths differ: {m_l.shape} vs {m_prev.shape}")
    if hier_lambda <= 1:
        raise ConfigurationError(f"hierarchy factor lambda must be > 1, got {hier_lambda}")
    if mask_mode not in MASK_MODES:
        raise ConfigurationError(f"mask_mode must be one of {MASK_MODES}, got {mask_mode!r}")
    scale = m_l - m_prev / hier_lambda
    offset = (m_l - 1.0) * F.LARGE if mask_mode == "additive" else np.zeros_like(m_l)
    return scale, offset


class HierarchicalMaskAttention(Module):
    """Multi-head attention from visual (or query) rows onto masked text tokens."""

    def __init__(self, dim: int, heads: int, rng: np.random.Generator):
        if heads < 1 or dim % heads:
            raise ConfigurationError(f"dim={dim} must be divisible by heads={heads}")
        self.heads = heads
        self.q_proj = Linear(dim, dim, rng)
        self.k_proj = Linear(dim, dim, rng)
        self.v_proj = Linear(dim, dim, rng)

    def forward(
        self,
        queries: Tensor,
        text: Tensor,
        current: HierMask,
        previous: HierMask,
        hier_lambda: float,
        mask_mode: str = "additive",
    ) -> tuple[Tensor, Tensor]:
        """Return the (n_q, C) output and the (heads, n_q, N_s) attention weights."""
        n_s = text.shape[0]
        if len(current) != n_s or len(previous) != n_s:
            raise ShapeError(f"mask lengths ({len(current)}, {len(previous)}) do not match {n_s} text tokens")
        scale, offset = effective_score_terms(current, previous, hier_lambda, mask_mode)
        q = F.split_heads(self.q_proj(queries), self.heads)
        k = F.split_heads(self.k_proj(text), self.heads)
        v = F.split_heads(self.v_proj(text), self.heads)
        scores = F.attention_scores(q, k) * scale
        weights = F.softmax_lastdim(scores, offset if mask_mode == "additive" else None)
        return F.merge_heads(matmul(weights, v)), weights
