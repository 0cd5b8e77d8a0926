"""Deterministic compositional grounding scenes.

Every scene holds a few coloured shapes and one referring expression whose
depth controls how many relational clauses are needed to single out the
target. From depth 2 on, the head noun phrase alone matches more than one
object, so the later phrases are what disambiguate.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from hierground.config import MIN_OBJECTS_FOR_DEPTH
from hierground.data.render import render_objects
from hierground.errors import ChunkingError, SceneGenerationError, SceneSemanticsError
from hierground.text.chunker import PhraseDecomposition, chunk
from hierground.text.lexicon import COLORS, RELATIONS, SHAPES

logger = logging.getLogger("hierground.data.scenes")

RELATION_MARGIN = 0.05
MAX_PAIR_IOU = 0.05

Attrs = tuple[str, str]


@dataclass(frozen=True)
class SceneObject:
    shape: str
    color: str
    box: tuple[float, float, float, float]

    @property
    def attrs(self) -> Attrs:
        return self.color, self.shape

    def to_dict(self) -> dict[str, Any]:
        return {"shape": self.shape, "color": self.color, "box": list(self.box)}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> SceneObject:
        return cls(shape=data["shape"], color=data["color"], box=tuple(float(v) for v in data["box"]))


@dataclass
class SceneConfig:
    """Knobs for one generated scene.

    Attributes:
        depth: Noun phrases in the expression (1 = "<color> <shape>").
        min_objects: Fewest objects on the canvas.
        max_objects: Most objects on the canvas.
        image_size: Raster side in pixels.
        min_size: Smallest normalized object side.
        max_size: Largest normalized object side.
        max_retries: Layout attempts before giving up.
    """

    depth: int = 1
    min_objects: int = 2
    max_objects: int = 6
    image_size: int = 64
    min_size: float = 0.12
    max_size: float = 0.25
    max_retries: int = 200


@dataclass
class SceneSpec:
    seed: int
    depth: int
    objects: list[SceneObject]
    target_index: int
    expression: tuple[str, ...]
    decomposition: PhraseDecomposition
    image: np.ndarray | None = field(default=None, repr=False)

    @property
    def b_gt(self) -> tuple[float, float, float, float]:
        return self.objects[self.target_index].box

    @property
    def sentence(self) -> str:
        return " ".join(self.expression)

    def to_dict(self) -> dict[str, Any]:
        return {
            "seed": self.seed,
            "depth": self.depth,
            "objects": [o.to_dict() for o in self.objects],
            "target_index": self.target_index,
            "expression": list(self.expression),
            "decomposition": self.decomposition.to_dict(),
            "b_gt": list(self.b_gt),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> SceneSpec:
        return cls(
            seed=int(data["seed"]),
            depth=int(data["depth"]),
            objects=[SceneObject.from_dict(o) for o in data["objects"]],
            target_index=int(data["target_index"]),
            expression=tuple(data["expression"]),
            decomposition=PhraseDecomposition.from_dict(data["decomposition"]),
        )


# -- formal semantics ----------------------------------------------------------


def relation_holds(relation: str, subject: SceneObject, anchor: SceneObject) -> bool:
    """Spatial predicate on box centres (image y grows downwards)."""
    sx, sy = subject.box[0], subject.box[1]
    ax, ay = anchor.box[0], anchor.box[1]
    if relation == "left of":
        return sx < ax
    if relation == "right of":
        return sx > ax
    if relation == "above":
        return sy < ay
    if relation == "below":
        return sy > ay
    raise SceneSemanticsError(f"unknown relation {relation!r}")


def _relation_gap(relation: str, subject: SceneObject, anchor: SceneObject) -> float:
    axis = 0 if relation in ("left of", "right of") else 1
    return abs(subject.box[axis] - anchor.box[axis])


def parse_expression(tokens: Sequence[str]) -> tuple[Attrs, list[tuple[str, Attrs]]]:
    """Split an expression into its head (color, shape) and (relation, anchor) clauses."""
    try:
        decomposition = chunk(tokens, max_phrases=None)
    except ChunkingError as e:
        raise SceneSemanticsError(f"expression is not in the scene grammar: {e}") from e
    parts = [(p.kind, tuple(tokens[p.start : p.end])) for p in decomposition.phrases]

    def noun(words: tuple[str, ...]) -> Attrs:
        if len(words) != 2 or words[0] not in COLORS or words[1] not in SHAPES:
            raise SceneSemanticsError(f"noun phrase {' '.join(words)!r} is not '<color> <shape>'")
        return words[0], words[1]

    if not parts or parts[0][0] != "noun" or len(parts) % 2 == 0:
        raise SceneSemanticsError(f"expression {' '.join(tokens)!r} is not NP (PP NP)*")
    head = noun(parts[0][1])
    clauses = []
    for (kind_r, rel_words), (kind_n, words) in zip(parts[1::2], parts[2::2]):
        relation = " ".join(rel_words)
        if kind_r != "preposition" or relation not in RELATIONS or kind_n != "noun":
            raise SceneSemanticsError(f"bad relational clause {relation!r} {' '.join(words)!r}")
        clauses.append((relation, noun(words)))
    return head, clauses


def satisfiers(objects: Sequence[SceneObject], tokens: Sequence[str]) -> list[int]:
    """Indices of every object the expression describes; anchors must be unique."""
    head, clauses = parse_expression(tokens)
    candidates = [i for i, o in enumerate(objects) if o.attrs == head]
    for relation, attrs in clauses:
        anchors = [o for o in objects if o.attrs == attrs]
        if len(anchors) != 1:
            raise SceneSemanticsError(f"anchor {' '.join(attrs)!r} matches {len(anchors)} objects, expected 1")
        candidates = [i for i in candidates if relation_holds(relation, objects[i], anchors[0])]
    return candidates


def verify_expression(scene: SceneSpec) -> int:
    """Return the unique object the scene's expression denotes.

    Raises:
        SceneSemanticsError: Zero or several objects satisfy the expression, or
            an anchor phrase is ambiguous.
    """
    found = satisfiers(scene.objects, scene.expression)
    if len(found) != 1:
        raise SceneSemanticsError(
            f"seed {scene.seed}: expression {scene.sentence!r} has {len(found)} satisfiers {found}, expected 1"
        )
    return found[0]


# -- generation ----------------------------------------------------------------


def _box_iou(a: Sequence[float], b: Sequence[float]) -> float:
    iw = max(0.0, min(a[0] + a[2] / 2, b[0] + b[2] / 2) - max(a[0] - a[2] / 2, b[0] - b[2] / 2))
    ih = max(0.0, min(a[1] + a[3] / 2, b[1] + b[3] / 2) - max(a[1] - a[3] / 2, b[1] - b[3] / 2))
    inter = iw * ih
    return inter / (a[2] * a[3] + b[2] * b[3] - inter)


Box = tuple[float, float, float, float]


def _place_boxes(rng: np.random.Generator, count: int, cfg: SceneConfig) -> list[Box] | None:
    boxes: list[Box] = []
    for _ in range(count):
        for _attempt in range(50):
            w, h = (float(v) for v in rng.uniform(cfg.min_size, cfg.max_size, size=2))
            cx = float(rng.uniform(w / 2, 1 - w / 2))
            cy = float(rng.uniform(h / 2, 1 - h / 2))
            box = (cx, cy, w, h)
            if all(_box_iou(box, other) < MAX_PAIR_IOU for other in boxes):
                boxes.append(box)
                break
        else:
            return None
    return boxes


def _other_attrs(rng: np.random.Generator, excluded: set[Attrs]) -> Attrs:
    while True:
        attrs = (COLORS[rng.integers(len(COLORS))], SHAPES[rng.integers(len(SHAPES))])
        if attrs not in excluded:
            return attrs


def _distinct_attrs(rng: np.random.Generator, count: int) -> list[Attrs]:
    chosen: list[Attrs] = []
    while len(chosen) < count:
        attrs = _other_attrs(rng, set(chosen))
        chosen.append(attrs)
    return chosen


def _pick_relation(
    rng: np.random.Generator,
    objects: Sequence[SceneObject],
    anchor: int,
    must_hold: Sequence[int],
    must_fail: Sequence[int],
) -> str | None:
    """A relation holding for ``must_hold`` and failing for ``must_fail`` w.r.t. the anchor, with margin."""
    options = []
    for relation in RELATIONS:
        ok = True
        for i in (*must_hold, *must_fail):
            if _relation_gap(relation, objects[i], objects[anchor]) <= RELATION_MARGIN:
                ok = False
                break
            holds = relation_holds(relation, objects[i], objects[anchor])
            if holds != (i in must_hold):
                ok = False
                break
        if ok:
            options.append(relation)
    if not options:
        return None
    return options[int(rng.integers(len(options)))]


def _attempt(rng: np.random.Generator, cfg: SceneConfig) -> tuple[list[SceneObject], int, list[str]] | None:
    depth = cfg.depth
    low = max(cfg.min_objects, MIN_OBJECTS_FOR_DEPTH[depth])
    num_objects = int(rng.integers(low, cfg.max_objects + 1))
    boxes = _place_boxes(rng, num_objects, cfg)
    if boxes is None:
        return None

    # roles: 0 = target, then head distractors, then anchors, then fillers
    n_anchors = depth - 1
    n_head = 1 if depth == 1 else int(rng.integers(2, num_objects - n_anchors + 1))
    distinct = _distinct_attrs(rng, 1 + n_anchors)
    head, anchor_attrs = distinct[0], distinct[1:]
    attrs = [head] * n_head + list(anchor_attrs)
    attrs += [_other_attrs(rng, set(distinct)) for _ in range(num_objects - len(attrs))]
    objects = [SceneObject(shape=s, color=c, box=b) for (c, s), b in zip(attrs, boxes)]

    target = 0
    heads = list(range(n_head))
    anchors = list(range(n_head, n_head + n_anchors))
    tokens = [head[0], head[1]]
    remaining = [i for i in heads if i != target]
    for k, anchor in enumerate(anchors):
        if depth == 3 and k == 0:
            # first clause leaves exactly one distractor for the second to remove
            keep, drop = remaining[:1], remaining[1:]
            relation = _pick_relation(rng, objects, anchor, [target, *keep], drop)
            remaining = keep
        else:
            relation = _pick_relation(rng, objects, anchor, [target], remaining)
            remaining = []
        if relation is None:
            return None
        tokens += [*RELATIONS[relation], *objects[anchor].attrs]

    # paint order is random
    order = rng.permutation(num_objects)
    objects = [objects[i] for i in order]
    target = int(np.flatnonzero(order == 0)[0])
    return objects, target, tokens


def generate_scene(seed: int, cfg: SceneConfig | None = None, render: bool = True) -> SceneSpec:
    """Build, verify and (optionally) render the scene for ``seed``.

    Raises:
        SceneGenerationError: No valid layout within ``cfg.max_retries`` attempts.
    """
    cfg = cfg or SceneConfig()
    if cfg.depth not in MIN_OBJECTS_FOR_DEPTH:
        raise SceneGenerationError(f"unsupported expression depth {cfg.depth}")
    if cfg.max_objects < MIN_OBJECTS_FOR_DEPTH[cfg.depth]:
        raise SceneGenerationError(
            f"depth {cfg.depth} needs at least {MIN_OBJECTS_FOR_DEPTH[cfg.depth]} objects, "
            f"max_objects={cfg.max_objects}"
        )
    rng = np.random.default_rng(seed)
    for attempt in range(cfg.max_retries):
        built = _attempt(rng, cfg)
        if built is None:
            continue
        objects, target, tokens = built
        scene = SceneSpec(
            seed=seed,
            depth=cfg.depth,
            objects=objects,
            target_index=target,
            expression=tuple(tokens),
            decomposition=chunk(tokens, max_phrases=None),
        )
        if verify_expression(scene) != target:
            raise SceneSemanticsError(f"seed {seed}: verifier disagrees with generated target")
        if render:
            scene.image = render_objects(objects, cfg.image_size)
        if attempt:
            logger.debug("seed %d: layout found after %d attempts", seed, attempt + 1)
        return scene
    raise SceneGenerationError(
        f"seed {seed}: no depth-{cfg.depth} layout with {cfg.min_objects}..{cfg.max_objects} objects "
        f"after {cfg.max_retries} attempts"
    )
