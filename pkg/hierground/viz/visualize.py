"""Attention maps, token maps, box overlay and trajectory export for one scene."""

from __future__ import annotations

import json
import logging
import os
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from hierground.autodiff.tensor import Tensor
from hierground.data.dataset import Sample, build_sample, load_scene
from hierground.data.imageio import write_pgm, write_ppm
from hierground.errors import InputError
from hierground.model.grounding import GroundingModel
from hierground.model.results import GroundingOutput
from hierground.training.evaluator import attention_masses, load_model

logger = logging.getLogger("hierground.viz.visualize")

GT_COLOR = (0, 255, 0)
PRED_COLOR = (255, 0, 255)


def scale_to_gray(values: np.ndarray) -> np.ndarray:
    """Linear min-max scaling to uint8; a constant map becomes all zeros."""
    values = np.asarray(values, dtype=np.float64)
    lo, hi = float(values.min()), float(values.max())
    if hi - lo <= 0:
        return np.zeros(values.shape, dtype=np.uint8)
    return np.rint((values - lo) / (hi - lo) * 255.0).astype(np.uint8)


def grid_to_image(values: np.ndarray, grid_h: int, grid_w: int, size: int) -> np.ndarray:
    """Nearest-neighbour upsampling of a per-token vector to a (size, size) map."""
    values = np.asarray(values, dtype=np.float64).reshape(grid_h, grid_w)
    if size % grid_h or size % grid_w:
        raise InputError(f"image size {size} is not a multiple of the {grid_h}x{grid_w} token grid")
    return np.repeat(np.repeat(values, size // grid_h, axis=0), size // grid_w, axis=1)


def token_norms(features: Tensor) -> np.ndarray:
    return np.linalg.norm(features.data, axis=-1)


def draw_box(rgb: np.ndarray, box: Sequence[float], color: tuple[int, int, int]) -> np.ndarray:
    """Draw a one-pixel outline of a normalized (cx, cy, w, h) box in place."""
    h_px, w_px = rgb.shape[:2]
    cx, cy, w, h = (float(v) for v in box)
    x0 = int(np.clip(np.floor((cx - w / 2) * w_px), 0, w_px - 1))
    x1 = int(np.clip(np.ceil((cx + w / 2) * w_px) - 1, 0, w_px - 1))
    y0 = int(np.clip(np.floor((cy - h / 2) * h_px), 0, h_px - 1))
    y1 = int(np.clip(np.ceil((cy + h / 2) * h_px) - 1, 0, h_px - 1))
    rgb[y0, x0 : x1 + 1] = color
    rgb[y1, x0 : x1 + 1] = color
    rgb[y0 : y1 + 1, x0] = color
    rgb[y0 : y1 + 1, x1] = color
    return rgb


@dataclass
class VisualizationResult:
    """Files written for one scene plus the numbers behind them."""

    output_dir: str
    files: list[str] = field(default_factory=list)
    predicted_box: list[float] = field(default_factory=list)
    gt_box: list[float] = field(default_factory=list)
    attention_mass: list[float] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "output_dir": self.output_dir,
            "files": self.files,
            "predicted_box": self.predicted_box,
            "gt_box": self.gt_box,
            "attention_mass_in_gt": self.attention_mass,
        }


def trajectory_document(output: GroundingOutput, sample: Sample, masses: Sequence[float]) -> dict[str, Any]:
    return {
        "seed": sample.seed,
        "expression": sample.scene.sentence,
        "gt_box": [float(v) for v in sample.gt],
        "predicted_box": [float(v) for v in output.box],
        "iterations": output.prediction.trajectory(),
        "attention_mass_in_gt": [float(m) for m in masses],
    }


def write_visualization(output: GroundingOutput, sample: Sample, out_dir: str) -> VisualizationResult:
    """Write every map for an already computed forward pass."""
    os.makedirs(out_dir, exist_ok=True)
    size = sample.image.shape[0]
    grid_h, grid_w = output.visual.grid_h, output.visual.grid_w
    result = VisualizationResult(
        output_dir=out_dir,
        predicted_box=[float(v) for v in output.box],
        gt_box=[float(v) for v in sample.gt],
    )

    def emit_gray(name: str, per_token: np.ndarray) -> None:
        path = os.path.join(out_dir, name)
        write_pgm(path, scale_to_gray(grid_to_image(per_token, grid_h, grid_w, size)))
        result.files.append(path)

    for level, received in enumerate(output.trace.received, start=1):
        emit_gray(f"attention_level_{level}.pgm", received)
    emit_gray("alignment.pgm", output.aligned.weights.data)
    emit_gray("coarse_tokens.pgm", token_norms(output.aligned.features))
    emit_gray("fine_tokens.pgm", token_norms(output.trace.final))

    overlay = np.array(sample.scene.image, dtype=np.uint8, copy=True)
    draw_box(overlay, sample.gt, GT_COLOR)
    draw_box(overlay, output.box, PRED_COLOR)
    overlay_path = os.path.join(out_dir, "overlay.ppm")
    write_ppm(overlay_path, overlay)
    result.files.append(overlay_path)

    result.attention_mass = attention_masses(output, sample.gt) if output.trace.received else []
    trajectory_path = os.path.join(out_dir, "trajectory.json")
    with open(trajectory_path, "w") as f:
        json.dump(trajectory_document(output, sample, result.attention_mass), f, indent=2)
        f.write("\n")
    result.files.append(trajectory_path)
    logger.info("wrote %d visualization files to %s", len(result.files), out_dir)
    return result


def visualize(model: GroundingModel, sample: Sample, out_dir: str) -> VisualizationResult:
    output = model(sample.image, sample.token_ids, sample.masks)
    return write_visualization(output, sample, out_dir)


def visualize_checkpoint(checkpoint_path: str, scene_path: str, out_dir: str) -> VisualizationResult:
    """Load a checkpoint and a scene JSON file and visualize the forward pass."""
    model = load_model(checkpoint_path)
    scene = load_scene(scene_path)
    if scene.image is not None and scene.image.shape[0] != model.config.image_size:
        raise InputError(
            f"scene raster is {scene.image.shape[0]}px but the model expects {model.config.image_size}px"
        )
    return visualize(model, build_sample(scene, model.config, model.lexicon), out_dir)
