"""Tests for global feature cross-modal alignment."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hierground.autodiff.tensor import Tensor
from hierground.errors import ConfigurationError, ShapeError
from hierground.model.alignment import GlobalFeatureAlignment
from hierground.model.results import TextTokens, VisualTokens
from tests._numeric import assert_gradients_match


def alignment_oracle(f_vt, f_e, w_v, w_s, inverse_temperature):
    a, b = f_vt @ w_v, f_e @ w_s
    norms = np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1)
    s = np.where(norms > 0, (a * b).sum(axis=1) / np.where(norms > 0, norms, 1.0), 0.0)
    e = np.exp(inverse_temperature * (s - s.max()))
    weights = e / e.sum()
    return s, weights, f_vt * weights[:, None]


def _identity_alignment(dim, rng=None):
    module = GlobalFeatureAlignment(dim, 1, rng or np.random.default_rng(0))
    module.shared_visual.weight.data[...] = np.eye(dim)
    module.shared_text.weight.data[...] = np.eye(dim)
    return module


class TestGlobalAlignment:
    @given(
        seed=st.integers(0, 2**31 - 1),
        n_v=st.integers(1, 9),
        inverse_temperature=st.floats(0.1, 20.0),
    )
    def test_matches_dense_reference(self, seed, n_v, inverse_temperature):
        rng = np.random.default_rng(seed)
        module = GlobalFeatureAlignment(8, 2, rng)
        f_vt, f_e = rng.normal(size=(n_v, 8)), rng.normal(size=(n_v, 8))
        aligned = module.global_alignment(Tensor(f_vt), Tensor(f_e), inverse_temperature)
        s, weights, features = alignment_oracle(
            f_vt, f_e, module.shared_visual.weight.data, module.shared_text.weight.data, inverse_temperature
        )
        np.testing.assert_allclose(aligned.similarity.data, s, atol=1e-12)
        np.testing.assert_allclose(aligned.weights.data, weights, atol=1e-12)
        np.testing.assert_allclose(aligned.features.data, features, atol=1e-12)
        assert aligned.weights.data.sum() == pytest.approx(1.0, abs=1e-9)
        assert np.all(aligned.weights.data >= 0)
        assert np.all(np.abs(s) <= 1.0 + 1e-12)

    def test_parallel_rows_give_uniform_weights(self, rng):
        module = _identity_alignment(4)
        f_vt = rng.normal(size=(5, 4))
        aligned = module.global_alignment(Tensor(f_vt), Tensor(f_vt * 2.5), 10.0)
        np.testing.assert_allclose(aligned.similarity.data, 1.0)
        np.testing.assert_allclose(aligned.weights.data, 0.2)

    def test_two_token_hand_computation(self):
        module = _identity_alignment(2)
        # cosines 0 and ln 2 against the same unit row
        c = np.log(2.0)
        f_vt = np.array([[0.0, 1.0], [c, np.sqrt(1 - c * c)]])
        f_e = np.array([[1.0, 0.0], [1.0, 0.0]])
        aligned = module.global_alignment(Tensor(f_vt), Tensor(f_e), 1.0)
        np.testing.assert_allclose(aligned.similarity.data, [0.0, c], atol=1e-12)
        np.testing.assert_allclose(aligned.weights.data, [1 / 3, 2 / 3], atol=1e-12)

    def test_anti_parallel_row_is_minimum_cosine(self):
        module = _identity_alignment(3)
        f = np.array([[1.0, 2.0, 3.0]])
        aligned = module.global_alignment(Tensor(f), Tensor(-f), 1.0)
        assert aligned.similarity.data[0] == pytest.approx(-1.0)

    def test_zero_row_has_zero_similarity_and_zero_output(self, rng):
        module = _identity_alignment(4)
        f_vt = rng.normal(size=(3, 4))
        f_vt[1] = 0.0
        aligned = module.global_alignment(Tensor(f_vt), Tensor(rng.normal(size=(3, 4))), 10.0)
        assert aligned.similarity.data[1] == 0.0
        np.testing.assert_array_equal(aligned.features.data[1], 0.0)

    def test_sharper_temperature_raises_argmax_weight(self, rng):
        module = GlobalFeatureAlignment(4, 1, rng)
        f_vt, f_e = Tensor(rng.normal(size=(6, 4))), Tensor(rng.normal(size=(6, 4)))
        soft = module.global_alignment(f_vt, f_e, 1.0)
        sharp = module.global_alignment(f_vt, f_e, 10.0)
        top = int(np.argmax(soft.similarity.data))
        assert sharp.weights.data[top] > soft.weights.data[top]

    def test_rejects_mismatched_inputs(self, rng):
        module = GlobalFeatureAlignment(4, 1, rng)
        with pytest.raises(ShapeError):
            module.global_alignment(Tensor(np.ones((3, 4))), Tensor(np.ones((2, 4))), 1.0)

    def test_rejects_non_positive_temperature(self, rng):
        module = GlobalFeatureAlignment(4, 1, rng)
        with pytest.raises(ConfigurationError):
            module.global_alignment(Tensor(np.ones((2, 4))), Tensor(np.ones((2, 4))), 0.0)

    def test_gradients(self, rng):
        module = GlobalFeatureAlignment(4, 1, rng)
        w = rng.normal(size=(5, 4))

        def loss(f_vt, f_e):
            return (module.global_alignment(f_vt, f_e, 3.0).features * w).sum()

        assert_gradients_match(loss, [rng.normal(size=(5, 4)), rng.normal(size=(5, 4))])


class TestCrossModalAttention:
    def test_output_has_one_row_per_visual_token(self, rng):
        module = GlobalFeatureAlignment(8, 2, rng)
        visual = VisualTokens(Tensor(rng.normal(size=(6, 8))), 2, 3)
        text = TextTokens(Tensor(rng.normal(size=(4, 8))), (0, 1, 2, 3))
        assert module.cross_modal_attention(visual, text).shape == (6, 8)

    def test_single_text_token_broadcasts_its_value(self, rng):
        module = GlobalFeatureAlignment(4, 2, rng)
        visual = VisualTokens(Tensor(rng.normal(size=(4, 4))), 2, 2)
        word = rng.normal(size=(1, 4))
        out = module.cross_modal_attention(visual, TextTokens(Tensor(word), (0,))).data
        attn = module.cross_attn
        expected = (word @ attn.v_proj.weight.data + attn.v_proj.bias.data) @ attn.out_proj.weight.data
        np.testing.assert_allclose(out, np.repeat(expected + attn.out_proj.bias.data, 4, axis=0), atol=1e-12)

    def test_rejects_width_mismatch(self, rng):
        module = GlobalFeatureAlignment(4, 1, rng)
        visual = VisualTokens(Tensor(np.ones((4, 4))), 2, 2)
        with pytest.raises(ShapeError):
            module.cross_modal_attention(visual, TextTokens(Tensor(np.ones((2, 8))), (0, 1)))


class TestDisabledAlignment:
    def test_residual_and_uniform_weights(self, rng):
        module = GlobalFeatureAlignment(4, 2, rng, enabled=False)
        visual = VisualTokens(Tensor(rng.normal(size=(4, 4))), 2, 2)
        text = TextTokens(Tensor(rng.normal(size=(3, 4))), (0, 1, 2))
        aligned = module(visual, text, 10.0)
        context = module.cross_modal_attention(visual, text).data
        np.testing.assert_allclose(aligned.features.data, visual.features.data + context)
        np.testing.assert_allclose(aligned.weights.data, 0.25)

    def test_creates_no_shared_projections(self, rng):
        names = [n for n, _ in GlobalFeatureAlignment(4, 2, rng, enabled=False).named_parameters()]
        assert all(n.startswith("cross_attn.") for n in names)
