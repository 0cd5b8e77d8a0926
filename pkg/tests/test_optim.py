"""Tests for the AdamW optimizer and parameter sets."""

import numpy as np
import pytest

from hierground.autodiff.nn import Module, Parameter
from hierground.autodiff.optim import AdamW, ParameterSet, optimizer_step
from hierground.errors import ConfigurationError, GradientError


class _Quadratic(Module):
    def __init__(self, w):
        self.w = Parameter(w)


def _set_of(**arrays):
    return ParameterSet(parameters={k: Parameter(v) for k, v in arrays.items()})


class TestParameterSet:
    def test_from_module_uses_paths(self):
        params = ParameterSet.from_module(_Quadratic([1.0, 2.0]))
        assert list(params) == ["w"]
        assert params.num_scalars() == 2

    def test_moments_appear_after_first_step(self):
        params = _set_of(w=[1.0])
        assert not params.first_moment and not params.second_moment
        params.parameters["w"].grad = np.array([0.5])
        optimizer_step(params, learning_rate=0.1)
        assert params.first_moment["w"].shape == (1,)
        assert params.second_moment["w"].shape == (1,)
        assert params.step_count == 1

    def test_grad_norm(self):
        params = _set_of(a=[0.0], b=[0.0, 0.0])
        params.parameters["a"].grad = np.array([3.0])
        params.parameters["b"].grad = np.array([0.0, 4.0])
        assert params.grad_norm() == pytest.approx(5.0)


class TestAdamW:
    def test_missing_grads_are_listed(self):
        params = _set_of(encoder=[1.0], head=[1.0])
        params.parameters["encoder"].grad = np.array([1.0])
        with pytest.raises(GradientError, match="head"):
            AdamW().step(params)

    def test_zero_gradient_no_decay_leaves_parameters(self):
        params = _set_of(w=[1.0, -2.0])
        params.parameters["w"].grad = np.zeros(2)
        optimizer_step(params, learning_rate=0.1, weight_decay=0.0)
        np.testing.assert_array_equal(params.parameters["w"].data, [1.0, -2.0])

    def test_single_step_descends(self):
        params = _set_of(w=[1.0])
        w = params.parameters["w"]
        (w * w).sum().backward()
        optimizer_step(params, learning_rate=0.1)
        assert w.data[0] < 1.0

    def test_gradients_left_in_place(self):
        params = _set_of(w=[1.0])
        params.parameters["w"].grad = np.array([2.0])
        optimizer_step(params, learning_rate=0.1)
        np.testing.assert_array_equal(params.parameters["w"].grad, [2.0])

    def test_converges_on_two_parameter_quadratic(self):
        target = np.array([0.3, -0.7])
        params = _set_of(w=[2.0, 1.5])
        w = params.parameters["w"]
        opt = AdamW(learning_rate=0.1)
        for _ in range(200):
            params.zero_grad()
            (((w - target) ** 2) * np.array([1.0, 3.0])).sum().backward()
            opt.step(params)
        np.testing.assert_allclose(w.data, target, atol=1e-3)

    def test_weight_decay_shrinks_without_gradient(self):
        params = _set_of(w=[1.0])
        params.parameters["w"].grad = np.zeros(1)
        AdamW(learning_rate=0.1, weight_decay=0.5).step(params)
        assert params.parameters["w"].data[0] == pytest.approx(0.95)

    def test_grad_clip_rescales(self):
        clipped = _set_of(w=[0.0])
        free = _set_of(w=[0.0])
        clipped.parameters["w"].grad = np.array([100.0])
        free.parameters["w"].grad = np.array([100.0])
        AdamW(learning_rate=0.1, grad_clip=1.0).step(clipped)
        AdamW(learning_rate=0.1).step(free)
        # first Adam step is sign-like, so both move by ~lr
        assert clipped.parameters["w"].data[0] == pytest.approx(free.parameters["w"].data[0], rel=1e-6)
        assert clipped.first_moment["w"][0] == pytest.approx(0.1)

    @pytest.mark.parametrize("kwargs", [{"learning_rate": 0.0}, {"betas": (1.0, 0.9)}])
    def test_rejects_bad_hyperparameters(self, kwargs):
        with pytest.raises(ConfigurationError):
            AdamW(**kwargs)
