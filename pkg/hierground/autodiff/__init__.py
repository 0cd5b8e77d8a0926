"""Dense tensors, reverse-mode autodiff, layers, AdamW and checkpoints."""

from hierground.autodiff.functional import (
    LARGE,
    cosine_similarity_rows,
    multi_head_attention,
    softmax_lastdim,
)
from hierground.autodiff.nn import MLP, LayerNorm, Linear, Module, ModuleList, MultiHeadAttention, Parameter
from hierground.autodiff.optim import AdamW, ParameterSet, optimizer_step
from hierground.autodiff.tensor import Tensor, as_tensor, concat, matmul, stack

__all__ = [
    "LARGE",
    "MLP",
    "AdamW",
    "LayerNorm",
    "Linear",
    "Module",
    "ModuleList",
    "MultiHeadAttention",
    "Parameter",
    "ParameterSet",
    "Tensor",
    "as_tensor",
    "concat",
    "cosine_similarity_rows",
    "matmul",
    "multi_head_attention",
    "optimizer_step",
    "softmax_lastdim",
    "stack",
]
