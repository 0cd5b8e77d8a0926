"""Train-then-test runs shared by ablation ladders and sweeps."""

from __future__ import annotations

import logging
import os
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from hierground.config import RunConfig
from hierground.data.dataset import Sample, generate_split
from hierground.training.evaluator import evaluate_model, load_model
from hierground.training.metrics import MetricReport
from hierground.training.trainer import Trainer, TrainingResult

logger = logging.getLogger("hierground.training.experiment")


@dataclass
class ExperimentData:
    """Prepared splits, reused across runs that share seed ranges."""

    train: list[Sample]
    val: list[Sample]
    test: list[Sample]

    @classmethod
    def generate(cls, config: RunConfig) -> ExperimentData:
        return cls(
            train=generate_split(config, "train"),
            val=generate_split(config, "val"),
            test=generate_split(config, "test"),
        )


@dataclass
class ExperimentResult:
    config: RunConfig
    training: TrainingResult
    test: MetricReport
    subsets: dict[str, MetricReport] = field(default_factory=dict)


@dataclass
class SeedSummary:
    """Mean and spread of test precision over repeated seeds."""

    name: str
    values: list[float] = field(default_factory=list)

    @property
    def mean(self) -> float:
        return float(np.mean(self.values)) if self.values else float("nan")

    @property
    def std(self) -> float:
        return float(np.std(self.values, ddof=1)) if len(self.values) > 1 else 0.0


def run_experiment(
    config: RunConfig,
    data: ExperimentData | None = None,
    subsets: Mapping[str, Sequence[Sample]] | None = None,
) -> ExperimentResult:
    """Train on the train split, keep the best-val weights, score the test split.

    Each non-empty entry of ``subsets`` is scored as well, under its own name.
    """
    data = data or ExperimentData.generate(config)
    trainer = Trainer(config)
    training = trainer.fit(data.train, data.val)
    model = load_model(training.checkpoint_path, config)
    run_id = os.path.basename(training.output_dir)
    test = evaluate_model(model, data.test, config, run_id=run_id, split="test", concentration=True)
    logger.info("%s seed %d: test prec %.4f", config.ablation_name, config.seed, test.prec)
    result = ExperimentResult(config=config, training=training, test=test)
    for name, samples in (subsets or {}).items():
        if samples:
            result.subsets[name] = evaluate_model(model, samples, config, run_id=run_id, split=name)
    return result


def slug(name: str) -> str:
    return name.replace("+", "plus_").replace(" ", "_").replace("/", "")
