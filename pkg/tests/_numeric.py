"""Finite-difference gradient checks shared by the autodiff-facing tests."""

from __future__ import annotations

from collections.abc import Callable, Sequence

import numpy as np

from hierground.autodiff.tensor import Tensor

EPS = 1e-5


def numeric_grads(fn: Callable[..., Tensor], arrays: Sequence[np.ndarray], eps: float = EPS) -> list[np.ndarray]:
    """Central differences of the scalar ``fn(*tensors)`` w.r.t. every input."""
    grads = []
    for i, base in enumerate(arrays):
        grad = np.zeros_like(base, dtype=np.float64)
        it = np.nditer(base, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            plus = [a.copy() for a in arrays]
            minus = [a.copy() for a in arrays]
            plus[i][idx] += eps
            minus[i][idx] -= eps
            f_plus = fn(*(Tensor(a) for a in plus)).item()
            f_minus = fn(*(Tensor(a) for a in minus)).item()
            grad[idx] = (f_plus - f_minus) / (2 * eps)
        grads.append(grad)
    return grads


def analytic_grads(fn: Callable[..., Tensor], arrays: Sequence[np.ndarray]) -> list[np.ndarray]:
    tensors = [Tensor(a.copy(), requires_grad=True) for a in arrays]
    fn(*tensors).backward()
    return [t.grad if t.grad is not None else np.zeros_like(t.data) for t in tensors]


def max_relative_error(a: np.ndarray, b: np.ndarray, floor: float = 1e-4) -> float:
    scale = np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)
    return float(np.max(np.abs(a - b) / scale)) if a.size else 0.0


def assert_gradients_match(fn: Callable[..., Tensor], arrays: Sequence[np.ndarray], tol: float = 1e-5) -> None:
    arrays = [np.asarray(a, dtype=np.float64) for a in arrays]
    for i, (num, ana) in enumerate(zip(numeric_grads(fn, arrays), analytic_grads(fn, arrays))):
        err = max_relative_error(num, ana)
        assert err < tol, f"input {i}: max relative error {err:.3e}"
