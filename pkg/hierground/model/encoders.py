"""Small trainable image and text encoders producing visual and text tokens."""

from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np

from hierground.autodiff.nn import Linear, Module, ModuleList, Parameter, TransformerLayer
from hierground.autodiff.tensor import Tensor
from hierground.errors import ConfigurationError, InputError
from hierground.model.results import TextTokens, VisualTokens

logger = logging.getLogger("hierground.model.encoders")


def sinusoid_1d(positions: np.ndarray, dim: int, base: float = 10000.0) -> np.ndarray:
    """Interleaved sin/cos encoding: out[:, 2k] = sin(p / base^(2k/dim)), out[:, 2k+1] = cos(.).

    Odd ``dim`` drops the trailing cosine.
    """
    positions = np.asarray(positions, dtype=np.float64).reshape(-1, 1)
    pairs = (dim + 1) // 2
    freqs = base ** (-2.0 * np.arange(pairs) / dim)
    angles = positions * freqs[None, :]
    out = np.empty((len(positions), 2 * pairs))
    out[:, 0::2] = np.sin(angles)
    out[:, 1::2] = np.cos(angles)
    return out[:, :dim]


def sinusoid_2d(grid_h: int, grid_w: int, dim: int) -> np.ndarray:
    """Row-major (grid_h * grid_w, dim): first half encodes the row, second half the column."""
    if dim % 4:
        raise ConfigurationError(f"2-D position encoding needs dim divisible by 4, got {dim}")
    half = dim // 2
    ys, xs = np.meshgrid(np.arange(grid_h), np.arange(grid_w), indexing="ij")
    return np.concatenate([sinusoid_1d(ys.reshape(-1), half), sinusoid_1d(xs.reshape(-1), half)], axis=1)


def patchify(image: np.ndarray, patch_size: int) -> tuple[np.ndarray, int, int]:
    """Split an H x W x 3 image into row-major flattened patches."""
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 3 or image.shape[2] != 3:
        raise InputError(f"expected an H x W x 3 image, got shape {image.shape}")
    h, w, _ = image.shape
    if h % patch_size or w % patch_size:
        raise ConfigurationError(f"image size {h}x{w} is not divisible by patch size {patch_size}")
    gh, gw = h // patch_size, w // patch_size
    patches = image.reshape(gh, patch_size, gw, patch_size, 3).transpose(0, 2, 1, 3, 4)
    return patches.reshape(gh * gw, patch_size * patch_size * 3), gh, gw


class VisualEncoder(Module):
    """Patch embedding + 2-D sinusoidal positions + self-attention layers."""

    def __init__(self, dim: int, heads: int, layers: int, patch_size: int, ff_mult: int, rng: np.random.Generator):
        self.dim = dim
        self.patch_size = patch_size
        self.patch_embed = Linear(patch_size * patch_size * 3, dim, rng)
        self.layers = ModuleList(TransformerLayer(dim, heads, ff_mult, rng) for _ in range(layers))

    def embed_patches(self, image: np.ndarray) -> tuple[Tensor, int, int]:
        patches, gh, gw = patchify(image, self.patch_size)
        return self.patch_embed(Tensor(patches)) + sinusoid_2d(gh, gw, self.dim), gh, gw

    def forward(self, image: np.ndarray) -> VisualTokens:
        x, gh, gw = self.embed_patches(image)
        for layer in self.layers:
            x = layer(x)
        return VisualTokens(features=x, grid_h=gh, grid_w=gw)


class TextEncoder(Module):
    """Embedding lookup + 1-D sinusoidal positions + self-attention layers."""

    def __init__(
        self,
        vocab_size: int,
        dim: int,
        heads: int,
        layers: int,
        max_len: int,
        ff_mult: int,
        rng: np.random.Generator,
    ):
        self.vocab_size = vocab_size
        self.max_len = max_len
        self.embedding = Parameter(rng.normal(0.0, 1.0, size=(vocab_size, dim)))
        self.layers = ModuleList(TransformerLayer(dim, heads, ff_mult, rng) for _ in range(layers))
        self._positions = sinusoid_1d(np.arange(max_len), dim)

    def forward(self, token_ids: Sequence[int]) -> TextTokens:
        ids = np.asarray(token_ids, dtype=np.int64).reshape(-1)
        if ids.size == 0:
            raise InputError("cannot encode an empty sentence")
        if ids.size > self.max_len:
            raise InputError(f"sentence has {ids.size} tokens, maximum is {self.max_len}")
        bad = ids[(ids < 0) | (ids >= self.vocab_size)]
        if bad.size:
            raise InputError(f"token ids {bad.tolist()} outside vocabulary of size {self.vocab_size}")
        x = self.embedding[ids] + self._positions[: ids.size]
        for layer in self.layers:
            x = layer(x)
        return TextTokens(features=x, token_ids=tuple(int(i) for i in ids))
