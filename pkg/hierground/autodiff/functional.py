"""Composite differentiable operations built on the tensor primitives."""

from __future__ import annotations

from collections.abc import Mapping

import numpy as np

from hierground.autodiff.tensor import ArrayLike, Function, Tensor, as_tensor, matmul
from hierground.errors import ConfigurationError, ShapeError

LARGE = 1e9


class SoftmaxLastDim(Function):
    def forward(self, x, mask=None):
        z = x if mask is None else x + mask
        z = z - z.max(axis=-1, keepdims=True)
        e = np.exp(z)
        self.out = e / e.sum(axis=-1, keepdims=True)
        return self.out

    def backward(self, grad):
        s = self.out
        return (s * (grad - (grad * s).sum(axis=-1, keepdims=True)),)


class CosineRows(Function):
    """Index-wise cosine similarity of two equally shaped row matrices.

    Rows whose norm product falls below ``eps`` get similarity 0 and no gradient.
    """

    def forward(self, a, b, eps):
        self.a, self.b = a, b
        self.na = np.sqrt((a * a).sum(axis=-1))
        self.nb = np.sqrt((b * b).sum(axis=-1))
        denom = self.na * self.nb
        self.valid = denom > eps
        safe = np.where(self.valid, denom, 1.0)
        self.dot = (a * b).sum(axis=-1)
        self.out = np.where(self.valid, self.dot / safe, 0.0)
        return self.out

    def backward(self, grad):
        valid = self.valid
        na = np.where(valid, self.na, 1.0)[..., None]
        nb = np.where(valid, self.nb, 1.0)[..., None]
        s = self.out[..., None]
        g = np.where(valid, grad, 0.0)[..., None]
        ga = g * (self.b / (na * nb) - s * self.a / (na * na))
        gb = g * (self.a / (na * nb) - s * self.b / (nb * nb))
        return ga, gb


def _mask_array(mask: ArrayLike | None) -> np.ndarray | None:
    if mask is None:
        return None
    return mask.data if isinstance(mask, Tensor) else np.asarray(mask, dtype=np.float64)


def softmax_lastdim(x: ArrayLike, additive_mask: ArrayLike | None = None) -> Tensor:
    """Softmax over the last axis with max-subtraction.

    ``additive_mask`` holds 0 for kept entries and ``-LARGE`` for dropped ones and
    must broadcast against ``x``.
    """
    x = as_tensor(x)
    if x.ndim == 0 or x.shape[-1] < 1:
        raise ShapeError(f"softmax needs a non-empty last dimension, got shape {x.shape}")
    mask = _mask_array(additive_mask)
    if mask is not None:
        try:
            np.broadcast_shapes(mask.shape, x.shape)
        except ValueError as e:
            raise ShapeError(f"mask shape {mask.shape} does not broadcast to {x.shape}") from e
    return SoftmaxLastDim.apply(x, mask=mask)


def cosine_similarity_rows(a: ArrayLike, b: ArrayLike, eps: float = 1e-12) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape:
        raise ShapeError(f"cosine similarity needs equal shapes: {a.shape} vs {b.shape}")
    return CosineRows.apply(a, b, eps=eps)


def linear(x: Tensor, weight: Tensor, bias: Tensor | None = None) -> Tensor:
    out = matmul(x, weight)
    return out if bias is None else out + bias


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-5) -> Tensor:
    mu = x.mean(axis=-1, keepdims=True)
    centered = x - mu
    var = (centered * centered).mean(axis=-1, keepdims=True)
    return centered / (var + eps).sqrt() * gamma + beta


def split_heads(x: Tensor, heads: int) -> Tensor:
    """(n, C) -> (heads, n, C/heads)."""
    n, dim = x.shape
    if dim % heads:
        raise ConfigurationError(f"feature dim {dim} is not divisible by heads={heads}")
    return x.reshape(n, heads, dim // heads).permute(1, 0, 2)


def merge_heads(x: Tensor) -> Tensor:
    """(heads, n, d) -> (n, heads*d)."""
    heads, n, d = x.shape
    return x.permute(1, 0, 2).reshape(n, heads * d)


def attention_scores(q_heads: Tensor, k_heads: Tensor) -> Tensor:
    """Scaled dot-product scores (heads, n_q, n_k)."""
    d = q_heads.shape[-1]
    return matmul(q_heads, k_heads.transpose()) * (1.0 / np.sqrt(d))


def multi_head_attention(
    q_in: Tensor,
    k_in: Tensor,
    v_in: Tensor,
    params: Mapping[str, Tensor],
    heads: int,
    additive_mask: ArrayLike | None = None,
    return_weights: bool = False,
) -> Tensor | tuple[Tensor, Tensor]:
    """Multi-head scaled dot-product attention with learned projections.

    ``params`` maps ``q_weight``, ``k_weight``, ``v_weight``, ``out_weight`` (and
    optionally the matching ``*_bias``) to tensors of shape (C, C) / (C,).

    Returns:
        The (n_q, C) output, plus the (heads, n_q, n_k) weights when
        ``return_weights`` is set.
    """
    dim = q_in.shape[-1]
    if dim % heads:
        raise ConfigurationError(f"feature dim {dim} is not divisible by heads={heads}")
    if k_in.shape[-1] != dim or v_in.shape[-1] != dim:
        raise ShapeError(f"attention inputs disagree on C: {q_in.shape}, {k_in.shape}, {v_in.shape}")
    if k_in.shape[0] != v_in.shape[0]:
        raise ShapeError(f"keys and values differ in length: {k_in.shape} vs {v_in.shape}")

    q = split_heads(linear(q_in, params["q_weight"], params.get("q_bias")), heads)
    k = split_heads(linear(k_in, params["k_weight"], params.get("k_bias")), heads)
    v = split_heads(linear(v_in, params["v_weight"], params.get("v_bias")), heads)
    weights = softmax_lastdim(attention_scores(q, k), additive_mask)
    out = linear(merge_heads(matmul(weights, v)), params["out_weight"], params.get("out_bias"))
    if return_weights:
        return out, weights
    return out
