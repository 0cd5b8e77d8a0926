"""AdamW with decoupled weight decay over a named parameter set."""

from __future__ import annotations

import logging
from collections.abc import Iterator
from dataclasses import dataclass, field

import numpy as np

from hierground.autodiff.nn import Module, Parameter
from hierground.errors import ConfigurationError, GradientError

logger = logging.getLogger("hierground.autodiff.optim")


@dataclass
class ParameterSet:
    """Named parameters plus the optimizer state that tracks them.

    Attributes:
        parameters: Parameter path -> tensor (requires_grad is always set).
        first_moment: Per-path first-moment buffers; empty until the first step.
        second_moment: Per-path second-moment buffers; empty until the first step.
        step_count: Number of optimizer steps applied so far.
    """

    parameters: dict[str, Parameter]
    first_moment: dict[str, np.ndarray] = field(default_factory=dict)
    second_moment: dict[str, np.ndarray] = field(default_factory=dict)
    step_count: int = 0

    @classmethod
    def from_module(cls, module: Module) -> ParameterSet:
        return cls(parameters=dict(module.named_parameters()))

    def __len__(self) -> int:
        return len(self.parameters)

    def __iter__(self) -> Iterator[str]:
        return iter(self.parameters)

    def items(self):
        return self.parameters.items()

    def zero_grad(self) -> None:
        for p in self.parameters.values():
            p.zero_grad()

    def missing_grads(self) -> list[str]:
        return [path for path, p in self.parameters.items() if p.grad is None]

    def grad_norm(self) -> float:
        total = 0.0
        for p in self.parameters.values():
            if p.grad is not None:
                total += float((p.grad * p.grad).sum())
        return float(np.sqrt(total))

    def num_scalars(self) -> int:
        return sum(p.size for p in self.parameters.values())


class AdamW:
    """Adaptive-moment optimizer with decoupled weight decay.

    Gradients are left in place; callers zero them between steps.
    """

    def __init__(
        self,
        learning_rate: float = 1e-3,
        betas: tuple[float, float] = (0.9, 0.999),
        weight_decay: float = 0.0,
        eps: float = 1e-8,
        grad_clip: float = 0.0,
    ):
        if learning_rate <= 0:
            raise ConfigurationError(f"learning_rate must be positive, got {learning_rate}")
        if not all(0.0 <= b < 1.0 for b in betas):
            raise ConfigurationError(f"betas must lie in [0, 1), got {betas}")
        self.learning_rate = learning_rate
        self.betas = betas
        self.weight_decay = weight_decay
        self.eps = eps
        self.grad_clip = grad_clip

    def step(self, params: ParameterSet) -> ParameterSet:
        missing = params.missing_grads()
        if missing:
            raise GradientError(f"no gradient for parameters: {', '.join(missing)}")

        scale = 1.0
        if self.grad_clip > 0:
            norm = params.grad_norm()
            if norm > self.grad_clip:
                scale = self.grad_clip / norm
                logger.debug("clipping grad norm %.4f to %.4f", norm, self.grad_clip)

        b1, b2 = self.betas
        params.step_count += 1
        t = params.step_count
        for path, p in params.items():
            g = p.grad * scale
            m = params.first_moment.setdefault(path, np.zeros_like(p.data))
            v = params.second_moment.setdefault(path, np.zeros_like(p.data))
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            m_hat = m / (1.0 - b1**t)
            v_hat = v / (1.0 - b2**t)
            if self.weight_decay:
                p.data *= 1.0 - self.learning_rate * self.weight_decay
            p.data -= self.learning_rate * m_hat / (np.sqrt(v_hat) + self.eps)
        return params


def optimizer_step(
    params: ParameterSet,
    learning_rate: float,
    betas: tuple[float, float] = (0.9, 0.999),
    weight_decay: float = 0.0,
    eps: float = 1e-8,
) -> ParameterSet:
    """Apply one AdamW update to ``params`` in place and return it."""
    return AdamW(learning_rate, betas, weight_decay, eps).step(params)
