"""Evaluation: precision, mean IoU, per-depth breakdown and attention concentration."""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence

import numpy as np

from hierground.autodiff.checkpoint import load_checkpoint
from hierground.config import RunConfig
from hierground.data.dataset import Sample, generate_split, load_split
from hierground.errors import CheckpointError, InputError
from hierground.model.grounding import GroundingModel
from hierground.model.results import GroundingOutput
from hierground.training.metrics import MetricReport, box_iou, build_report
from hierground.utils.workers import ordered_map

logger = logging.getLogger("hierground.training.evaluator")

Predictor = Callable[[Sample], np.ndarray]


def attention_mass_in_box(received: np.ndarray, grid_h: int, grid_w: int, box: Sequence[float]) -> float:
    """Share of per-token attention whose patch centre falls inside ``box``."""
    cx, cy, w, h = (float(v) for v in box)
    ys = (np.arange(grid_h) + 0.5) / grid_h
    xs = (np.arange(grid_w) + 0.5) / grid_w
    inside = (np.abs(ys[:, None] - cy) <= h / 2) & (np.abs(xs[None, :] - cx) <= w / 2)
    weights = np.asarray(received, dtype=np.float64).reshape(grid_h, grid_w)
    total = weights.sum()
    return float(weights[inside].sum() / total) if total > 0 else 0.0


def attention_masses(output: GroundingOutput, box: Sequence[float]) -> list[float]:
    grid_h, grid_w = output.visual.grid_h, output.visual.grid_w
    return [attention_mass_in_box(r, grid_h, grid_w, box) for r in output.trace.received]


def is_nondecreasing(values: Sequence[float], tol: float = 1e-12) -> bool:
    return all(b >= a - tol for a, b in zip(values, values[1:]))


def _concentration_fraction(
    outputs: Sequence[GroundingOutput],
    samples: Sequence[Sample],
    hits: Sequence[bool],
) -> float | None:
    eligible = 0
    rising = 0
    for output, sample, hit in zip(outputs, samples, hits):
        if not hit or len(sample.scene.objects) < 2 or len(output.trace.received) < 2:
            continue
        eligible += 1
        rising += is_nondecreasing(attention_masses(output, sample.gt))
    return rising / eligible if eligible else None


def _is_hit(pred: np.ndarray, gt: np.ndarray, config: RunConfig) -> bool:
    iou = box_iou(pred, gt)
    return iou >= config.prec_threshold if config.prec_inclusive else iou > config.prec_threshold


def evaluate_predictor(
    predictor: Predictor,
    samples: Sequence[Sample],
    config: RunConfig,
    run_id: str = "predictor",
    split: str = "test",
) -> MetricReport:
    """Score an arbitrary box predictor on ``samples``."""
    if not samples:
        raise InputError(f"split {split!r} has no samples to evaluate")
    predictions = ordered_map(predictor, samples)
    return build_report(
        run_id,
        split,
        predictions,
        [s.gt for s in samples],
        [s.depth for s in samples],
        config.prec_threshold,
        config.prec_inclusive,
    )


def evaluate_model(
    model: GroundingModel,
    samples: Sequence[Sample],
    config: RunConfig,
    run_id: str = "model",
    split: str = "test",
    concentration: bool = False,
) -> MetricReport:
    """Run the model over ``samples``; optionally measure attention concentration."""
    if not samples:
        raise InputError(f"split {split!r} has no samples to evaluate")
    outputs = ordered_map(lambda s: model(s.image, s.token_ids, s.masks), samples)
    predictions = [o.box for o in outputs]
    frac = None
    if concentration and not config.disable_cmhm:
        hits = [_is_hit(p, s.gt, config) for p, s in zip(predictions, samples)]
        frac = _concentration_fraction(outputs, samples, hits)
    return build_report(
        run_id,
        split,
        predictions,
        [s.gt for s in samples],
        [s.depth for s in samples],
        config.prec_threshold,
        config.prec_inclusive,
        attn_nondecreasing_frac=frac,
    )


def load_model(checkpoint_path: str, expected: RunConfig | None = None) -> GroundingModel:
    """Rebuild a model from a checkpoint's embedded config and weights.

    Raises:
        CheckpointError: The checkpoint's dimensions disagree with ``expected``.
    """
    ckpt = load_checkpoint(checkpoint_path)
    if not ckpt.config:
        raise CheckpointError(f"{checkpoint_path} carries no embedded config")
    config = RunConfig.from_dict(ckpt.config)
    if expected is not None and expected.model_signature != config.model_signature:
        diff = {
            k: (config.model_signature[k], v)
            for k, v in expected.model_signature.items()
            if config.model_signature[k] != v
        }
        raise CheckpointError(f"checkpoint/config dimension mismatch (checkpoint, config): {diff}")
    model = GroundingModel(config)
    model.load_state_dict(ckpt.arrays)
    return model


def evaluate_checkpoint(
    checkpoint_path: str,
    split: str = "test",
    data_dir: str | None = None,
    expected: RunConfig | None = None,
) -> MetricReport:
    """Evaluate a checkpoint on a split regenerated from seeds or read from ``data_dir``."""
    model = load_model(checkpoint_path, expected)
    config = model.config
    samples = load_split(data_dir, split, config) if data_dir else generate_split(config, split)
    report = evaluate_model(model, samples, config, run_id=checkpoint_path, split=split, concentration=True)
    logger.info("%s on %s: prec %.4f, mean IoU %.4f", checkpoint_path, split, report.prec, report.mean_iou)
    return report
