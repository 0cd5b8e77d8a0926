"""Parameter containers and the small layer library the grounding model needs."""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping

import numpy as np

from hierground.autodiff import functional as F
from hierground.autodiff.tensor import Tensor
from hierground.errors import CheckpointError, ConfigurationError


class Parameter(Tensor):
    """A leaf tensor that always requires grad."""

    def __init__(self, data):
        super().__init__(np.array(data, dtype=np.float64), requires_grad=True)

    def __repr__(self) -> str:
        return f"Parameter(shape={self.shape})"


class Module:
    """Base class: parameters and sub-modules are discovered from attributes.

    Parameter paths are dotted attribute names in assignment order, e.g.
    ``matcher.layer.hm_attn.q_proj.weight``.
    """

    def forward(self, *args, **kwargs):
        raise NotImplementedError

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Parameter]]:
        for name, value in vars(self).items():
            path = f"{prefix}{name}"
            if isinstance(value, Parameter):
                yield path, value
            elif isinstance(value, Module):
                yield from value.named_parameters(prefix=f"{path}.")

    def parameters(self) -> list[Parameter]:
        return [p for _, p in self.named_parameters()]

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    def state_dict(self) -> dict[str, np.ndarray]:
        return {path: p.data.copy() for path, p in self.named_parameters()}

    def load_state_dict(self, state: Mapping[str, np.ndarray]) -> None:
        """Copy arrays into parameters; paths and shapes must match exactly.

        Raises:
            CheckpointError: On missing/unexpected paths or shape disagreement.
        """
        own = dict(self.named_parameters())
        missing = sorted(set(own) - set(state))
        unexpected = sorted(set(state) - set(own))
        if missing or unexpected:
            raise CheckpointError(f"parameter paths differ: missing={missing[:5]} unexpected={unexpected[:5]}")
        for path, p in own.items():
            arr = np.asarray(state[path])
            if arr.shape != p.shape:
                raise CheckpointError(f"shape mismatch for {path}: checkpoint {arr.shape} vs model {p.shape}")
            p.data[...] = arr.astype(np.float64)


class ModuleList(Module):
    def __init__(self, modules: Iterable[Module]):
        self._items = list(modules)

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Parameter]]:
        for i, module in enumerate(self._items):
            yield from module.named_parameters(prefix=f"{prefix}{i}.")

    def __iter__(self) -> Iterator[Module]:
        return iter(self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __getitem__(self, index: int) -> Module:
        return self._items[index]


class Linear(Module):
    """x @ W + b with W uniform in +-sqrt(1/fan_in) and b = 0."""

    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator, bias: bool = True):
        bound = np.sqrt(1.0 / in_features)
        self.weight = Parameter(rng.uniform(-bound, bound, size=(in_features, out_features)))
        self.bias = Parameter(np.zeros(out_features)) if bias else None

    def forward(self, x: Tensor) -> Tensor:
        return F.linear(x, self.weight, self.bias)


class LayerNorm(Module):
    def __init__(self, dim: int, eps: float = 1e-5):
        self.gamma = Parameter(np.ones(dim))
        self.beta = Parameter(np.zeros(dim))
        self.eps = eps

    def forward(self, x: Tensor) -> Tensor:
        return F.layer_norm(x, self.gamma, self.beta, self.eps)


class MLP(Module):
    """Linear layers with ReLU between them (none after the last)."""

    def __init__(self, sizes: list[int], rng: np.random.Generator):
        if len(sizes) < 2:
            raise ConfigurationError(f"MLP needs at least input and output sizes, got {sizes}")
        self.layers = ModuleList(Linear(a, b, rng) for a, b in zip(sizes[:-1], sizes[1:]))

    def forward(self, x: Tensor) -> Tensor:
        last = len(self.layers) - 1
        for i, layer in enumerate(self.layers):
            x = layer(x)
            if i < last:
                x = x.relu()
        return x


class MultiHeadAttention(Module):
    def __init__(self, dim: int, heads: int, rng: np.random.Generator):
        if heads < 1 or dim % heads:
            raise ConfigurationError(f"dim={dim} must be divisible by heads={heads}")
        self.heads = heads
        self.q_proj = Linear(dim, dim, rng)
        self.k_proj = Linear(dim, dim, rng)
        self.v_proj = Linear(dim, dim, rng)
        self.out_proj = Linear(dim, dim, rng)

    def projection_params(self) -> dict[str, Tensor]:
        params = {}
        for key in ("q", "k", "v", "out"):
            proj = getattr(self, f"{key}_proj")
            params[f"{key}_weight"] = proj.weight
            if proj.bias is not None:
                params[f"{key}_bias"] = proj.bias
        return params

    def forward(self, q_in, k_in, v_in, additive_mask=None, return_weights: bool = False):
        return F.multi_head_attention(
            q_in,
            k_in,
            v_in,
            self.projection_params(),
            self.heads,
            additive_mask=additive_mask,
            return_weights=return_weights,
        )


class TransformerLayer(Module):
    """Pre-norm self-attention block with a ReLU feed-forward."""

    def __init__(self, dim: int, heads: int, ff_mult: int, rng: np.random.Generator):
        self.norm1 = LayerNorm(dim)
        self.attn = MultiHeadAttention(dim, heads, rng)
        self.norm2 = LayerNorm(dim)
        self.ff = MLP([dim, dim * ff_mult, dim], rng)

    def forward(self, x: Tensor) -> Tensor:
        h = self.norm1(x)
        x = x + self.attn(h, h, h)
        return x + self.ff(self.norm2(x))
