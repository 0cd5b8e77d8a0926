"""Mini-batch training of the grounding model."""

from __future__ import annotations

import csv
import logging
import math
import os
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from hierground.autodiff.checkpoint import save_checkpoint
from hierground.autodiff.optim import AdamW, ParameterSet
from hierground.config import RunConfig
from hierground.data.dataset import Sample
from hierground.errors import TrainingDivergedError
from hierground.model.grounding import GroundingModel
from hierground.text.lexicon import DEFAULT_LEXICON, Lexicon
from hierground.training.losses import LossBreakdown, total_loss
from hierground.utils.seeding import SHUFFLE, substream

logger = logging.getLogger("hierground.training.trainer")

LOG_COLUMNS = ("epoch", "total", "l_q", "l_cons", "val_prec_at_0.5", "val_mean_iou")
BEST_CHECKPOINT = "best.hgck"
LAST_GOOD_CHECKPOINT = "last_good.hgck"


@dataclass
class EpochRecord:
    epoch: int
    total: float
    l_q: float
    l_cons: float
    val_prec: float
    val_mean_iou: float

    def csv_row(self) -> list[str]:
        return [
            str(self.epoch),
            f"{self.total:.8f}",
            f"{self.l_q:.8f}",
            f"{self.l_cons:.8f}",
            f"{self.val_prec:.6f}",
            f"{self.val_mean_iou:.6f}",
        ]


@dataclass
class TrainingResult:
    """What a finished run left behind.

    Attributes:
        output_dir: Run directory.
        checkpoint_path: Best-validation checkpoint.
        log_path: Per-epoch CSV log.
        epochs: One record per completed epoch.
        best_val_prec: Validation precision of the saved checkpoint.
        best_epoch: Epoch of the saved checkpoint (0 = initial weights).
    """

    output_dir: str
    checkpoint_path: str
    log_path: str
    epochs: list[EpochRecord] = field(default_factory=list)
    best_val_prec: float = 0.0
    best_epoch: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "output_dir": self.output_dir,
            "checkpoint_path": self.checkpoint_path,
            "log_path": self.log_path,
            "best_val_prec": self.best_val_prec,
            "best_epoch": self.best_epoch,
            "epochs": [asdict(e) for e in self.epochs],
        }


class Trainer:
    """Optimizes the summed query and consistency losses with AdamW.

    Each batch loss is the mean of per-sample losses; every sample's tape is
    released right after its backward pass.
    """

    def __init__(self, config: RunConfig, model: GroundingModel | None = None, lexicon: Lexicon = DEFAULT_LEXICON):
        self.config = config
        self.model = model or GroundingModel(config, lexicon)
        self.params = ParameterSet.from_module(self.model)
        self.optimizer = AdamW(
            learning_rate=config.learning_rate,
            betas=config.betas,
            weight_decay=config.weight_decay,
            eps=config.adam_eps,
            grad_clip=config.grad_clip,
        )
        self._shuffle = substream(config.seed, SHUFFLE)

    def sample_loss(self, sample: Sample) -> LossBreakdown:
        output = self.model(sample.image, sample.token_ids, sample.masks)
        return total_loss(output.prediction, sample.gt, self.config.lambda1, self.config.lambda2)

    def train_step(self, batch: Sequence[Sample]) -> dict[str, float]:
        """One optimizer step on ``batch``; returns batch-mean loss values.

        Raises:
            TrainingDivergedError: A sample produced a non-finite loss.
        """
        self.params.zero_grad()
        weight = 1.0 / len(batch)
        sums = {"total": 0.0, "l_q": 0.0, "l_cons": 0.0}
        for sample in batch:
            losses = self.sample_loss(sample)
            value = losses.total.item()
            if not math.isfinite(value):
                raise TrainingDivergedError(f"non-finite loss {value} on scene seed {sample.seed}")
            (losses.total * weight).backward()
            sums["total"] += value * weight
            sums["l_q"] += losses.l_q.item() * weight
            sums["l_cons"] += losses.l_cons.item() * weight
        self.optimizer.step(self.params)
        logger.debug("step %d: loss %.6f", self.params.step_count, sums["total"])
        return sums

    def _save(self, path: str, state: dict[str, np.ndarray] | None = None) -> str:
        return save_checkpoint(
            path,
            state if state is not None else self.model.state_dict(),
            self.config.to_dict(),
            self.config.checkpoint_dtype,
        )

    def fit(self, train: Sequence[Sample], val: Sequence[Sample]) -> TrainingResult:
        """Train for ``config.epochs`` epochs, keeping the best-validation checkpoint.

        Raises:
            TrainingDivergedError: Loss became non-finite; the weights of the
                last completed epoch are written to ``last_good.hgck`` first.
        """
        from hierground.training.evaluator import evaluate_model

        cfg = self.config
        out_dir = cfg.effective_output_dir
        os.makedirs(out_dir, exist_ok=True)
        cfg.save(os.path.join(out_dir, "config.json"))
        result = TrainingResult(
            output_dir=out_dir,
            checkpoint_path=os.path.join(out_dir, BEST_CHECKPOINT),
            log_path=os.path.join(out_dir, "train_log.csv"),
        )
        best = -1.0
        last_good = self.model.state_dict()

        with open(result.log_path, "w", newline="") as log_file:
            writer = csv.writer(log_file, lineterminator="\n")
            writer.writerow(LOG_COLUMNS)
            for epoch in range(1, cfg.epochs + 1):
                order = self._shuffle.permutation(len(train))
                totals = {"total": 0.0, "l_q": 0.0, "l_cons": 0.0}
                batches = 0
                for start in range(0, len(order), cfg.batch_size):
                    batch = [train[i] for i in order[start : start + cfg.batch_size]]
                    try:
                        step = self.train_step(batch)
                    except TrainingDivergedError as e:
                        path = self._save(os.path.join(out_dir, LAST_GOOD_CHECKPOINT), last_good)
                        raise TrainingDivergedError(f"epoch {epoch}: {e}", checkpoint_path=path) from e
                    for key in totals:
                        totals[key] += step[key]
                    batches += 1

                report = evaluate_model(self.model, val, cfg, run_id=f"epoch{epoch}", split="val")
                record = EpochRecord(
                    epoch=epoch,
                    total=totals["total"] / max(batches, 1),
                    l_q=totals["l_q"] / max(batches, 1),
                    l_cons=totals["l_cons"] / max(batches, 1),
                    val_prec=report.prec,
                    val_mean_iou=report.mean_iou,
                )
                result.epochs.append(record)
                writer.writerow(record.csv_row())
                log_file.flush()
                logger.info(
                    "epoch %d/%d: loss %.4f (L_Q %.4f, L_cons %.4f) val prec %.3f",
                    epoch,
                    cfg.epochs,
                    record.total,
                    record.l_q,
                    record.l_cons,
                    record.val_prec,
                )
                last_good = self.model.state_dict()
                if record.val_prec > best:
                    best = record.val_prec
                    result.best_val_prec = record.val_prec
                    result.best_epoch = epoch
                    self._save(result.checkpoint_path)

        if best < 0:
            self._save(result.checkpoint_path)
        return result
