"""Synthetic scenes, rasters and dataset splits."""

from hierground.data.dataset import Sample, build_sample, generate_split, load_split, write_dataset
from hierground.data.scenes import SceneConfig, SceneObject, SceneSpec, generate_scene, verify_expression

__all__ = [
    "Sample",
    "SceneConfig",
    "SceneObject",
    "SceneSpec",
    "build_sample",
    "generate_scene",
    "generate_split",
    "load_split",
    "verify_expression",
    "write_dataset",
]
