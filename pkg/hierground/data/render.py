"""Filled, non-anti-aliased shape rasters."""

from __future__ import annotations

from collections.abc import Sequence
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from hierground.data.scenes import SceneObject

BACKGROUND = (128, 128, 128)

PALETTE: dict[str, tuple[int, int, int]] = {
    "red": (230, 25, 25),
    "green": (20, 180, 40),
    "blue": (30, 60, 230),
    "yellow": (240, 220, 20),
    "white": (250, 250, 250),
    "black": (10, 10, 10),
    "orange": (250, 140, 10),
    "purple": (140, 30, 190),
}


def shape_mask(shape: str, box: Sequence[float], size: int) -> np.ndarray:
    """Boolean (size, size) coverage of ``shape`` inside ``box``, sampled at pixel centres."""
    cx, cy, w, h = box
    centres = (np.arange(size) + 0.5) / size
    y, x = np.meshgrid(centres, centres, indexing="ij")
    if shape == "square":
        return (np.abs(x - cx) <= w / 2) & (np.abs(y - cy) <= h / 2)
    if shape == "circle":
        return ((x - cx) / (w / 2)) ** 2 + ((y - cy) / (h / 2)) ** 2 <= 1.0
    if shape == "triangle":
        top = cy - h / 2
        depth = (y - top) / h
        return (depth >= 0) & (depth <= 1) & (np.abs(x - cx) <= (w / 2) * depth)
    raise ValueError(f"unknown shape {shape!r}")


def render_objects(objects: Sequence[SceneObject], size: int) -> np.ndarray:
    """Paint objects in order over a grey canvas; returns uint8 (size, size, 3)."""
    image = np.empty((size, size, 3), dtype=np.uint8)
    image[...] = BACKGROUND
    for obj in objects:
        image[shape_mask(obj.shape, obj.box, size)] = PALETTE[obj.color]
    return image


def to_model_input(image: np.ndarray) -> np.ndarray:
    return np.asarray(image, dtype=np.float64) / 255.0
