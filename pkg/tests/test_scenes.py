"""Tests for scene generation, expression semantics and rasters."""

import numpy as np
import pytest

from hierground.data.imageio import decode_pgm, decode_ppm, encode_pgm, encode_ppm
from hierground.data.render import BACKGROUND, PALETTE, render_objects, shape_mask
from hierground.data.scenes import (
    SceneConfig,
    SceneObject,
    SceneSpec,
    generate_scene,
    satisfiers,
    verify_expression,
)
from hierground.errors import InputError, SceneGenerationError, SceneSemanticsError
from hierground.text.chunker import chunk
from hierground.text.lexicon import tokenize


def _scene(objects, sentence, target=0):
    tokens = tuple(tokenize(sentence))
    return SceneSpec(
        seed=0,
        depth=1,
        objects=objects,
        target_index=target,
        expression=tokens,
        decomposition=chunk(tokens, max_phrases=None),
    )


RED_LEFT = SceneObject("square", "red", (0.2, 0.5, 0.1, 0.1))
RED_RIGHT = SceneObject("square", "red", (0.8, 0.5, 0.1, 0.1))
BLUE_CIRCLE = SceneObject("circle", "blue", (0.5, 0.5, 0.1, 0.1))


def _centre_relation(relation, subject, anchor):
    dx = subject.box[0] - anchor.box[0]
    dy = subject.box[1] - anchor.box[1]
    return {"left of": dx < 0, "right of": dx > 0, "above": dy < 0, "below": dy > 0}[relation]


def brute_force_referents(scene):
    """Independent reading of "<c> <s> (<rel> <c> <s>)*" over all objects."""
    words = list(scene.expression)
    head = (words[0], words[1])
    rest = words[2:]
    clauses = []
    while rest:
        if rest[0] in ("left", "right"):
            relation, rest = f"{rest[0]} of", rest[2:]
        else:
            relation, rest = rest[0], rest[1:]
        clauses.append((relation, (rest[0], rest[1])))
        rest = rest[2:]
    found = []
    for i, obj in enumerate(scene.objects):
        if (obj.color, obj.shape) != head:
            continue
        ok = True
        for relation, attrs in clauses:
            anchors = [o for o in scene.objects if (o.color, o.shape) == attrs]
            ok = ok and len(anchors) == 1 and _centre_relation(relation, obj, anchors[0])
        if ok:
            found.append(i)
    return found


def _pair_iou(a, b):
    iw = max(0.0, min(a[0] + a[2] / 2, b[0] + b[2] / 2) - max(a[0] - a[2] / 2, b[0] - b[2] / 2))
    ih = max(0.0, min(a[1] + a[3] / 2, b[1] + b[3] / 2) - max(a[1] - a[3] / 2, b[1] - b[3] / 2))
    return iw * ih / (a[2] * a[3] + b[2] * b[3] - iw * ih)


class TestVerifyExpression:
    def test_single_noun_phrase(self):
        assert verify_expression(_scene([BLUE_CIRCLE, RED_LEFT], "red square")) == 1

    def test_relation_disambiguates(self):
        scene = _scene([RED_RIGHT, BLUE_CIRCLE, RED_LEFT], "red square left of blue circle")
        assert verify_expression(scene) == 2

    def test_two_satisfiers(self):
        with pytest.raises(SceneSemanticsError, match="2 satisfiers"):
            verify_expression(_scene([RED_LEFT, RED_RIGHT, BLUE_CIRCLE], "red square"))

    def test_ambiguous_anchor(self):
        objects = [BLUE_CIRCLE, RED_LEFT, RED_RIGHT]
        with pytest.raises(SceneSemanticsError, match="anchor"):
            satisfiers(objects, tuple(tokenize("blue circle left of red square")))

    def test_expression_outside_grammar(self):
        with pytest.raises(SceneSemanticsError):
            satisfiers([RED_LEFT], ("red", "square", "left", "of"))


class TestGenerateScene:
    def test_depth_one(self):
        scene = generate_scene(42, SceneConfig(depth=1, min_objects=2, max_objects=2))
        assert len(scene.expression) == 2
        assert len(scene.objects) == 2
        assert scene.decomposition.num_phrases == 1
        assert scene.b_gt == scene.objects[scene.target_index].box

    @pytest.mark.parametrize("depth", [2, 3])
    def test_head_phrase_is_ambiguous(self, depth):
        for seed in range(50):
            scene = generate_scene(seed, SceneConfig(depth=depth), render=False)
            head = (scene.expression[0], scene.expression[1])
            matches = [o for o in scene.objects if o.attrs == head]
            assert len(matches) >= 2
            assert brute_force_referents(scene) == [scene.target_index]
            assert scene.decomposition.num_phrases == 2 * depth - 1

    def test_same_seed_is_byte_identical(self):
        a = generate_scene(7, SceneConfig(depth=2))
        b = generate_scene(7, SceneConfig(depth=2))
        assert a.to_dict() == b.to_dict()
        assert a.image.tobytes() == b.image.tobytes()

    def test_infeasible_configuration(self):
        with pytest.raises(SceneGenerationError, match="depth 3"):
            generate_scene(0, SceneConfig(depth=3, max_objects=3))

    def test_dict_roundtrip(self):
        scene = generate_scene(3, SceneConfig(depth=3), render=False)
        again = SceneSpec.from_dict(scene.to_dict())
        assert again.to_dict() == scene.to_dict()

    @pytest.mark.slow
    def test_verifier_agrees_over_many_seeds(self):
        for seed in range(10_000):
            scene = generate_scene(seed, SceneConfig(depth=1 + seed % 3), render=False)
            assert verify_expression(scene) == scene.target_index
            boxes = [o.box for o in scene.objects]
            for i in range(len(boxes)):
                for j in range(i + 1, len(boxes)):
                    assert _pair_iou(boxes[i], boxes[j]) < 0.05


class TestRender:
    def test_background_and_palette(self):
        image = render_objects([RED_LEFT], 20)
        assert image.dtype == np.uint8
        assert tuple(image[0, 0]) == BACKGROUND
        assert tuple(image[10, 4]) == PALETTE["red"]

    def test_later_objects_paint_over_earlier(self):
        big = SceneObject("square", "blue", (0.5, 0.5, 0.5, 0.5))
        small = SceneObject("circle", "yellow", (0.5, 0.5, 0.1, 0.1))
        image = render_objects([big, small], 32)
        assert tuple(image[16, 16]) == PALETTE["yellow"]

    def test_triangle_apex_is_narrow(self):
        mask = shape_mask("triangle", (0.5, 0.5, 0.5, 0.5), 40)
        assert mask[11].sum() < mask[28].sum()

    def test_unknown_shape(self):
        with pytest.raises(ValueError):
            shape_mask("star", (0.5, 0.5, 0.2, 0.2), 8)


class TestNetpbm:
    def test_ppm_header_and_roundtrip(self, rng):
        rgb = rng.integers(0, 256, size=(3, 5, 3), dtype=np.uint8)
        payload = encode_ppm(rgb)
        assert payload.startswith(b"P6\n5 3\n255\n")
        np.testing.assert_array_equal(decode_ppm(payload), rgb)

    def test_pgm_with_comment(self):
        payload = b"P5\n# made by hand\n2 1\n255\n\x00\xff"
        np.testing.assert_array_equal(decode_pgm(payload), [[0, 255]])

    def test_wrong_magic(self):
        with pytest.raises(InputError, match="P5"):
            decode_pgm(encode_ppm(np.zeros((1, 1, 3), dtype=np.uint8)))

    def test_truncated_pixels(self):
        with pytest.raises(InputError, match="truncated"):
            decode_pgm(encode_pgm(np.zeros((2, 2), dtype=np.uint8))[:-1])

    def test_rejects_float_arrays(self):
        with pytest.raises(InputError):
            encode_pgm(np.zeros((2, 2)))
