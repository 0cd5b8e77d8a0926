"""Tests for multi-head attention and the layer library."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hierground.autodiff import functional as F
from hierground.autodiff.nn import MLP, Linear, ModuleList, MultiHeadAttention, Parameter, TransformerLayer
from hierground.autodiff.tensor import Tensor
from hierground.errors import CheckpointError, ConfigurationError
from tests._numeric import assert_gradients_match
from tests._reference import dense_attention


def random_params(rng, dim, bias=True):
    params = {f"{k}_weight": rng.normal(size=(dim, dim)) / np.sqrt(dim) for k in ("q", "k", "v", "out")}
    if bias:
        params.update({f"{k}_bias": rng.normal(size=dim) * 0.1 for k in ("q", "k", "v", "out")})
    return params


class TestMultiHeadAttention:
    @given(
        seed=st.integers(0, 2**31 - 1),
        heads=st.sampled_from([1, 2, 4]),
        n_q=st.integers(1, 5),
        n_k=st.integers(1, 6),
    )
    def test_matches_dense_reference(self, seed, heads, n_q, n_k):
        rng = np.random.default_rng(seed)
        dim = 8
        q, k, v = rng.normal(size=(n_q, dim)), rng.normal(size=(n_k, dim)), rng.normal(size=(n_k, dim))
        params = random_params(rng, dim)
        out, weights = F.multi_head_attention(
            Tensor(q), Tensor(k), Tensor(v), {n: Tensor(a) for n, a in params.items()}, heads, return_weights=True
        )
        ref_out, ref_weights = dense_attention(q, k, v, params, heads)
        np.testing.assert_allclose(out.data, ref_out, atol=1e-12)
        np.testing.assert_allclose(weights.data, ref_weights, atol=1e-12)

    def test_single_key_returns_projected_value(self, rng):
        dim = 4
        params = random_params(rng, dim, bias=False)
        v = rng.normal(size=(1, dim))
        out = F.multi_head_attention(
            Tensor(rng.normal(size=(3, dim))),
            Tensor(rng.normal(size=(1, dim))),
            Tensor(v),
            {n: Tensor(a) for n, a in params.items()},
            heads=2,
        )
        expected = v @ params["v_weight"] @ params["out_weight"]
        np.testing.assert_allclose(out.data, np.repeat(expected, 3, axis=0), atol=1e-12)

    def test_zero_query_attends_uniformly(self, rng):
        dim = 4
        params = random_params(rng, dim, bias=False)
        k, v = rng.normal(size=(5, dim)), rng.normal(size=(5, dim))
        out, weights = F.multi_head_attention(
            Tensor(np.zeros((2, dim))),
            Tensor(k),
            Tensor(v),
            {n: Tensor(a) for n, a in params.items()},
            heads=1,
            return_weights=True,
        )
        np.testing.assert_allclose(weights.data, 0.2)
        expected = (v @ params["v_weight"]).mean(axis=0) @ params["out_weight"]
        np.testing.assert_allclose(out.data[0], expected, atol=1e-12)

    def test_identity_projections_one_hot_inputs(self):
        eye = np.eye(3)
        params = {f"{k}_weight": Tensor(eye) for k in ("q", "k", "v", "out")}
        out = F.multi_head_attention(Tensor(eye), Tensor(eye), Tensor(eye), params, heads=1)
        scores = eye / np.sqrt(3)
        w = np.exp(scores) / np.exp(scores).sum(axis=1, keepdims=True)
        np.testing.assert_allclose(out.data, w, atol=1e-12)

    def test_masked_keys_get_no_weight(self, rng):
        dim = 4
        params = {n: Tensor(a) for n, a in random_params(rng, dim).items()}
        mask = np.array([0.0, -F.LARGE, 0.0])
        _, weights = F.multi_head_attention(
            Tensor(rng.normal(size=(2, dim))),
            Tensor(rng.normal(size=(3, dim))),
            Tensor(rng.normal(size=(3, dim))),
            params,
            heads=2,
            additive_mask=mask,
            return_weights=True,
        )
        assert np.all(weights.data[..., 1] < 1e-30)

    def test_heads_must_divide_dim(self, rng):
        with pytest.raises(ConfigurationError):
            MultiHeadAttention(6, 4, rng)

    def test_gradients(self, rng):
        dim, heads = 4, 2
        params = random_params(rng, dim)
        names = sorted(params)

        def loss(q, kv, *weights):
            ps = dict(zip(names, weights))
            return (F.multi_head_attention(q, kv, kv, ps, heads) ** 2).sum()

        arrays = [rng.normal(size=(3, dim)), rng.normal(size=(4, dim))] + [params[n] for n in names]
        assert_gradients_match(loss, arrays)


class TestModules:
    def test_linear_init_bounds(self, rng):
        layer = Linear(16, 8, rng)
        assert np.all(np.abs(layer.weight.data) <= np.sqrt(1 / 16))
        np.testing.assert_array_equal(layer.bias.data, 0.0)

    def test_named_parameters_paths(self, rng):
        mlp = MLP([3, 4, 2], rng)
        names = [n for n, _ in mlp.named_parameters()]
        assert names == ["layers.0.weight", "layers.0.bias", "layers.1.weight", "layers.1.bias"]

    def test_bias_free_linear_has_one_parameter(self, rng):
        assert [n for n, _ in Linear(3, 3, rng, bias=False).named_parameters()] == ["weight"]

    def test_mlp_needs_two_sizes(self, rng):
        with pytest.raises(ConfigurationError):
            MLP([4], rng)

    def test_state_dict_roundtrip(self, rng):
        a = TransformerLayer(8, 2, 2, rng)
        b = TransformerLayer(8, 2, 2, np.random.default_rng(99))
        b.load_state_dict(a.state_dict())
        x = Tensor(rng.normal(size=(5, 8)))
        np.testing.assert_array_equal(a(x).data, b(x).data)

    def test_load_state_dict_rejects_missing_and_misshaped(self, rng):
        mlp = MLP([3, 2], rng)
        state = mlp.state_dict()
        with pytest.raises(CheckpointError, match="missing"):
            mlp.load_state_dict({k: v for k, v in state.items() if k != "layers.0.bias"})
        state["layers.0.weight"] = np.zeros((2, 3))
        with pytest.raises(CheckpointError, match="shape mismatch"):
            mlp.load_state_dict(state)

    def test_transformer_layer_backward_reaches_every_parameter(self, rng):
        layer = TransformerLayer(8, 2, 2, rng)
        (layer(Tensor(rng.normal(size=(4, 8)))) ** 2).sum().backward()
        assert all(p.grad is not None for p in layer.parameters())

    def test_module_list_indexing(self, rng):
        items = ModuleList([Linear(2, 2, rng), Linear(2, 3, rng)])
        assert len(items) == 2
        assert items[1].weight.shape == (2, 3)

    def test_parameter_always_requires_grad(self):
        p = Parameter([1.0, 2.0])
        assert p.requires_grad
        assert isinstance(p, Tensor)
