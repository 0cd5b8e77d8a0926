"""HierGrounder - Core orchestrator for training, evaluating and inspecting grounding runs."""

from __future__ import annotations

import csv
import logging
import os
from collections.abc import Sequence
from typing import TYPE_CHECKING, Any

from hierground.config import RunConfig
from hierground.text.lexicon import DEFAULT_LEXICON, Lexicon, tokenize

if TYPE_CHECKING:
    from hierground.text.chunker import PhraseDecomposition
    from hierground.training.ablation import AblationTable
    from hierground.training.experiment import ExperimentData
    from hierground.training.metrics import MetricReport
    from hierground.training.sweep import SweepTable
    from hierground.training.trainer import TrainingResult
    from hierground.viz.visualize import VisualizationResult

logger = logging.getLogger("hierground")


def write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


class HierGrounder:
    """Main orchestrator for grounding experiments.

    Supports both simple constructor usage and full configuration via the
    RunConfig dataclass. Scene splits are generated lazily and shared between
    the runs one grounder performs.

    Examples:
        # Simple usage
        grounder = HierGrounder(epochs=5)
        result = grounder.train()

        # Full config
        config = RunConfig.load("cfg.json")
        grounder = HierGrounder.from_config(config)

        # Context manager
        with HierGrounder.from_config(config) as grounder:
            table = grounder.ablate(seeds=3)
    """

    def __init__(self, lexicon: Lexicon = DEFAULT_LEXICON, **config: Any):
        self._config = RunConfig(**config)
        self._lexicon = lexicon
        self._data: ExperimentData | None = None

    @classmethod
    def from_config(cls, config: RunConfig, lexicon: Lexicon = DEFAULT_LEXICON) -> HierGrounder:
        """Create a HierGrounder from a RunConfig dataclass."""
        instance = cls.__new__(cls)
        instance._config = config
        instance._lexicon = lexicon
        instance._data = None
        return instance

    @staticmethod
    def run(config: RunConfig) -> tuple[TrainingResult, MetricReport]:
        """One-liner: train on the train split, then evaluate the best checkpoint on test.

        Returns:
            Tuple of (TrainingResult, test MetricReport)
        """
        with HierGrounder.from_config(config) as grounder:
            training = grounder.train()
            return training, grounder.evaluate(training.checkpoint_path, split="test")

    @property
    def config(self) -> RunConfig:
        return self._config

    def _experiment_data(self) -> ExperimentData:
        if self._data is None:
            from hierground.training.experiment import ExperimentData

            self._data = ExperimentData.generate(self._config)
        return self._data

    def train(self) -> TrainingResult:
        """Train with the configured seeds; writes config.json, train_log.csv and best.hgck."""
        from hierground.training.trainer import Trainer

        data = self._experiment_data()
        return Trainer(self._config, lexicon=self._lexicon).fit(data.train, data.val)

    def evaluate(
        self,
        checkpoint_path: str,
        split: str = "test",
        data_dir: str | None = None,
        csv_path: str | None = None,
        check_config: bool = True,
    ) -> MetricReport:
        """Evaluate a checkpoint and write the metrics CSV next to it (or to ``csv_path``).

        With ``check_config`` the checkpoint must share this grounder's model
        dimensions, otherwise CheckpointError is raised.
        """
        from hierground.training.evaluator import evaluate_checkpoint

        expected = self._config if check_config else None
        report = evaluate_checkpoint(checkpoint_path, split=split, data_dir=data_dir, expected=expected)
        if csv_path is None:
            csv_path = os.path.join(os.path.dirname(checkpoint_path) or ".", f"metrics_{split}.csv")
        write_csv(csv_path, report.csv_header(), [report.csv_row()])
        logger.info("Metrics written to %s", csv_path)
        return report

    def ablate(self, seeds: int = 3, out_root: str | None = None, acceptance: bool = True) -> AblationTable:
        """Run the five-row component ladder; writes ablation.csv under ``out_root``.

        With ``acceptance`` the thresholds are evaluated too and written to
        acceptance.csv next to the ladder.
        """
        from hierground.training.ablation import run_ablation
        from hierground.training.acceptance import ACCEPTANCE_COLUMNS

        out_root = out_root or self._config.effective_output_dir
        table = run_ablation(
            self._config, seeds=seeds, out_root=out_root, data=self._experiment_data(), acceptance=acceptance
        )
        path = os.path.join(out_root, "ablation.csv")
        os.makedirs(out_root, exist_ok=True)
        with open(path, "w") as f:
            f.write(table.to_csv())
        logger.info("Ablation table written to %s", path)
        if table.acceptance is not None:
            write_csv(os.path.join(out_root, "acceptance.csv"), ACCEPTANCE_COLUMNS, table.acceptance.rows())
        return table

    def sweep(self, param: str, values: Sequence[Any], seeds: int = 1, out_root: str | None = None) -> SweepTable:
        """Sweep one hyperparameter; writes sweep_<param>.csv under ``out_root``."""
        from hierground.training.sweep import run_sweep

        out_root = out_root or self._config.effective_output_dir
        table = run_sweep(self._config, param, values, seeds=seeds, out_root=out_root, data=self._experiment_data())
        path = os.path.join(out_root, f"sweep_{param}.csv")
        os.makedirs(out_root, exist_ok=True)
        with open(path, "w") as f:
            f.write(table.to_csv())
        logger.info("Sweep table written to %s", path)
        return table

    def generate_data(self, seeds: Sequence[int], split: str, out_dir: str) -> dict[str, list[int]]:
        """Write scene JSON + PPM files for ``seeds`` and register them under ``split``."""
        from hierground.data.dataset import write_dataset

        return write_dataset(out_dir, {split: seeds}, self._config)

    @staticmethod
    def visualize(checkpoint_path: str, scene_path: str, out_dir: str) -> VisualizationResult:
        from hierground.viz.visualize import visualize_checkpoint

        return visualize_checkpoint(checkpoint_path, scene_path, out_dir)

    def chunk(self, sentence: str, max_phrases: int | None = None) -> PhraseDecomposition:
        """Decouple one sentence into phrases (uncapped unless ``max_phrases`` is given)."""
        from hierground.text.chunker import chunk

        return chunk(tokenize(sentence), self._lexicon, max_phrases=max_phrases)

    def close(self) -> None:
        """Release cached scene splits."""
        self._data = None

    def __enter__(self) -> HierGrounder:
        return self

    def __exit__(self, *exc) -> None:
        self.close()
