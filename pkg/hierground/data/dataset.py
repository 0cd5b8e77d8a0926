"""Dataset splits: seed ranges, model-ready samples and on-disk scene directories."""

from __future__ import annotations

import json
import logging
import os
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from hierground.data.imageio import read_ppm, write_ppm
from hierground.data.render import render_objects, to_model_input
from hierground.data.scenes import SceneConfig, SceneSpec, generate_scene
from hierground.errors import InputError
from hierground.text.chunker import HierMask, cap_phrases, hierarchical_masks
from hierground.text.lexicon import DEFAULT_LEXICON, Lexicon
from hierground.utils.workers import ordered_map

if TYPE_CHECKING:
    from hierground.config import RunConfig

logger = logging.getLogger("hierground.data.dataset")

MANIFEST = "manifest.json"
SPLITS = ("train", "val", "test")


@dataclass
class Sample:
    """One scene prepared for the model."""

    scene: SceneSpec
    image: np.ndarray
    token_ids: list[int]
    masks: list[HierMask]
    gt: np.ndarray

    @property
    def seed(self) -> int:
        return self.scene.seed

    @property
    def depth(self) -> int:
        return self.scene.depth

    @property
    def num_levels(self) -> int:
        return len(self.masks)


def scene_config_for(config: RunConfig, seed: int) -> SceneConfig:
    return SceneConfig(
        depth=config.depths[seed % len(config.depths)],
        min_objects=config.min_objects,
        max_objects=config.max_objects,
        image_size=config.image_size,
    )


def build_sample(scene: SceneSpec, config: RunConfig, lexicon: Lexicon = DEFAULT_LEXICON) -> Sample:
    if scene.image is None:
        scene.image = render_objects(scene.objects, config.image_size)
    decomposition = cap_phrases(scene.decomposition, config.max_phrases)
    return Sample(
        scene=scene,
        image=to_model_input(scene.image),
        token_ids=lexicon.token_ids(scene.expression),
        masks=hierarchical_masks(decomposition),
        gt=np.asarray(scene.b_gt, dtype=np.float64),
    )


def generate_samples(config: RunConfig, seeds: Iterable[int], lexicon: Lexicon = DEFAULT_LEXICON) -> list[Sample]:
    """Generate and prepare scenes for ``seeds`` (fanned out over HIERGROUND_THREADS workers)."""

    def make(seed: int) -> Sample:
        return build_sample(generate_scene(seed, scene_config_for(config, seed)), config, lexicon)

    return ordered_map(make, list(seeds))


def generate_split(config: RunConfig, split: str, lexicon: Lexicon = DEFAULT_LEXICON) -> list[Sample]:
    seeds = config.split_seeds(split)
    if len(seeds) == 0:
        raise InputError(f"split {split!r} is empty")
    logger.info("generating %d %s scenes", len(seeds), split)
    return generate_samples(config, seeds, lexicon)


# -- scene directories -----------------------------------------------------------


def _scene_paths(out_dir: str, seed: int) -> tuple[str, str]:
    stem = os.path.join(out_dir, f"scene_{seed}")
    return f"{stem}.json", f"{stem}.ppm"


def write_scene(out_dir: str, scene: SceneSpec) -> str:
    json_path, ppm_path = _scene_paths(out_dir, scene.seed)
    with open(json_path, "w") as f:
        json.dump(scene.to_dict(), f, indent=2)
        f.write("\n")
    if scene.image is not None:
        write_ppm(ppm_path, scene.image)
    return json_path


def load_scene(path: str) -> SceneSpec:
    """Read a scene JSON file and the PPM raster next to it, when present."""
    try:
        with open(path) as f:
            scene = SceneSpec.from_dict(json.load(f))
    except (OSError, json.JSONDecodeError, KeyError) as e:
        raise InputError(f"cannot read scene {path}: {e}") from e
    ppm_path = os.path.splitext(path)[0] + ".ppm"
    if os.path.exists(ppm_path):
        scene.image = read_ppm(ppm_path)
    return scene


def read_manifest(data_dir: str) -> dict[str, list[int]]:
    path = os.path.join(data_dir, MANIFEST)
    if not os.path.exists(path):
        return {}
    with open(path) as f:
        return {k: [int(s) for s in v] for k, v in json.load(f).items()}


def write_dataset(
    out_dir: str,
    seeds_by_split: dict[str, Sequence[int]],
    config: RunConfig,
) -> dict[str, list[int]]:
    """Write scene JSON + PPM files and merge the split lists into the manifest."""
    os.makedirs(out_dir, exist_ok=True)
    manifest = read_manifest(out_dir)

    def make(seed: int) -> SceneSpec:
        return generate_scene(seed, scene_config_for(config, seed))

    for split, seeds in seeds_by_split.items():
        scenes = ordered_map(make, list(seeds))
        for scene in scenes:
            write_scene(out_dir, scene)
        manifest[split] = sorted(set(manifest.get(split, [])) | {s.seed for s in scenes})
        logger.info("wrote %d %s scenes to %s", len(scenes), split, out_dir)
    with open(os.path.join(out_dir, MANIFEST), "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return manifest


def load_split(data_dir: str, split: str, config: RunConfig, lexicon: Lexicon = DEFAULT_LEXICON) -> list[Sample]:
    """Load a split listed in ``data_dir``'s manifest.

    Raises:
        InputError: Missing manifest entry or an empty split.
    """
    manifest = read_manifest(data_dir)
    if split not in manifest:
        raise InputError(f"split {split!r} not listed in {os.path.join(data_dir, MANIFEST)}")
    seeds = manifest[split]
    if not seeds:
        raise InputError(f"split {split!r} is empty")
    return [build_sample(load_scene(_scene_paths(data_dir, s)[0]), config, lexicon) for s in seeds]
