"""Tests for output formatters."""

import json

import pytest

from hierground.output import get_formatter
from hierground.output._utils import fmt_mean_std, fmt_score
from hierground.training.ablation import AblationTable, find_inversions
from hierground.training.acceptance import AcceptanceCheck, AcceptanceReport
from hierground.training.experiment import SeedSummary
from hierground.training.metrics import MetricReport
from hierground.training.sweep import SweepTable
from hierground.training.trainer import EpochRecord, TrainingResult
from hierground.viz.visualize import VisualizationResult


@pytest.fixture
def sample_report():
    return MetricReport(
        run_id="runs/full/best.hgck",
        split="test",
        prec=0.8125,
        mean_iou=0.7,
        count=16,
        per_depth={1: (1.0, 6), 2: (0.75, 8)},
        attn_nondecreasing_frac=0.5,
    )


@pytest.fixture
def sample_ablation():
    rows = [
        SeedSummary("Baseline", [0.4, 0.5]),
        SeedSummary("+GFCMA", [0.6, 0.6]),
        SeedSummary("+CMHM", [0.55, 0.55]),
    ]
    return AblationTable(rows=rows, inversions=find_inversions(rows))


@pytest.fixture
def accepted_ablation(sample_ablation):
    sample_ablation.acceptance = AcceptanceReport(
        [
            AcceptanceCheck("min_seed_prec_at_0.5", 0.8, 0.85),
            AcceptanceCheck("full_minus_baseline", 0.1, 0.05),
            AcceptanceCheck("hierarchy_benefit_depth2", None, 0.05),
            AcceptanceCheck("attn_nondecreasing_frac", 0.7, 0.6),
        ]
    )
    return sample_ablation


@pytest.fixture
def sample_sweep():
    return SweepTable(param="iterations", rows=[(1, SeedSummary("iterations=1", [0.5])), (6, SeedSummary("i", [0.7]))])


@pytest.fixture
def sample_training():
    return TrainingResult(
        output_dir="runs/full",
        checkpoint_path="runs/full/best.hgck",
        log_path="runs/full/train_log.csv",
        epochs=[EpochRecord(1, 3.2, 3.0, 0.2, 0.25, 0.3), EpochRecord(2, 2.1, 2.0, 0.1, 0.5, 0.45)],
        best_val_prec=0.5,
        best_epoch=2,
    )


@pytest.fixture
def sample_visualization():
    return VisualizationResult(
        output_dir="viz",
        files=["viz/attention_level_1.pgm", "viz/overlay.ppm"],
        predicted_box=[0.5, 0.5, 0.2, 0.2],
        gt_box=[0.5, 0.5, 0.25, 0.25],
        attention_mass=[0.2, 0.35],
    )


class TestUtils:
    def test_fmt_score(self):
        assert fmt_score(0.81254) == "0.8125"
        assert fmt_score(None) == "-"
        assert fmt_score(float("nan")) == "-"

    def test_fmt_mean_std(self):
        assert fmt_mean_std(0.5, 0.05) == "0.5000 +- 0.0500"


class TestGetFormatter:
    @pytest.mark.parametrize("name", ["table", "json", "plain"])
    def test_known_names(self, name):
        assert get_formatter(name) is not None

    def test_unknown_name(self):
        with pytest.raises(ValueError, match="Unknown format"):
            get_formatter("xml")


class TestJsonFormatter:
    def test_format_metrics(self, sample_report):
        data = json.loads(get_formatter("json").format_metrics(sample_report))
        assert data["prec_at_0.5"] == 0.8125
        assert data["per_depth"]["2"] == {"prec": 0.75, "count": 8}
        assert data["attn_nondecreasing_frac"] == 0.5

    def test_format_ablation(self, sample_ablation):
        data = json.loads(get_formatter("json").format_ablation(sample_ablation))
        assert [r["configuration"] for r in data["rows"]] == ["Baseline", "+GFCMA", "+CMHM"]
        assert data["inversions"] == [["+GFCMA", "+CMHM"]]
        assert data["acceptance"] is None

    def test_format_ablation_with_acceptance(self, accepted_ablation):
        data = json.loads(get_formatter("json").format_ablation(accepted_ablation))
        assert data["acceptance"]["passed"] is False
        assert [c["status"] for c in data["acceptance"]["checks"]] == ["fail", "pass", "skipped", "pass"]

    def test_format_sweep(self, sample_sweep):
        data = json.loads(get_formatter("json").format_sweep(sample_sweep))
        assert data["param"] == "iterations"
        assert [r["value"] for r in data["rows"]] == [1, 6]

    def test_format_training(self, sample_training):
        data = json.loads(get_formatter("json").format_training(sample_training))
        assert data["best_epoch"] == 2
        assert data["epochs"][0]["l_cons"] == 0.2

    def test_format_visualization(self, sample_visualization):
        data = json.loads(get_formatter("json").format_visualization(sample_visualization))
        assert data["attention_mass_in_gt"] == [0.2, 0.35]


class TestPlainFormatter:
    def test_format_metrics(self, sample_report):
        output = get_formatter("plain").format_metrics(sample_report)
        assert "Prec@0.5: 0.8125" in output
        assert "depth 2: 0.7500 over 8 scenes" in output
        assert "depth 3: - over 0 scenes" in output

    def test_format_ablation_flags_inversions(self, sample_ablation):
        output = get_formatter("plain").format_ablation(sample_ablation)
        assert "Baseline" in output
        assert "0.4500 +- 0.0707" in output
        assert "[WARN] +CMHM scored below +GFCMA" in output
        assert "Acceptance" not in output

    def test_format_ablation_lists_acceptance_checks(self, accepted_ablation):
        output = get_formatter("plain").format_ablation(accepted_ablation)
        assert "min_seed_prec_at_0.5       0.8000 (>= 0.85) FAIL" in output
        assert "hierarchy_benefit_depth2   - (>= 0.05) SKIPPED" in output
        assert "attn_nondecreasing_frac    0.7000 (>= 0.60) PASS" in output

    def test_format_sweep(self, sample_sweep):
        output = get_formatter("plain").format_sweep(sample_sweep)
        assert output.startswith("Sweep: iterations")
        assert "iterations=6: 0.7000 +- 0.0000" in output

    def test_format_training(self, sample_training):
        output = get_formatter("plain").format_training(sample_training)
        assert "Best val Prec@0.5 0.5000 at epoch 2" in output
        assert "Checkpoint: runs/full/best.hgck" in output

    def test_format_visualization(self, sample_visualization):
        output = get_formatter("plain").format_visualization(sample_visualization)
        assert "viz/overlay.ppm" in output
        assert "0.2000, 0.3500" in output


class TestTableFormatter:
    def test_format_metrics(self, sample_report):
        output = get_formatter("table").format_metrics(sample_report)
        assert "Depth" in output
        assert "0.8125" in output
        assert "Mean IoU" in output

    def test_format_ablation(self, sample_ablation):
        output = get_formatter("table").format_ablation(sample_ablation)
        assert "Component Ablation" in output
        assert "adjacent inversion" in output

    def test_format_ablation_with_acceptance(self, accepted_ablation):
        output = get_formatter("table").format_ablation(accepted_ablation)
        assert "Acceptance" in output
        assert "acceptance failed: min_seed_prec_at" in output
        assert "skipped" in output

    def test_format_sweep(self, sample_sweep):
        assert "Sweep over iterations" in get_formatter("table").format_sweep(sample_sweep)

    def test_format_training(self, sample_training):
        output = get_formatter("table").format_training(sample_training)
        assert "Best epoch" in output
        assert "L_cons" in output

    def test_format_visualization(self, sample_visualization):
        output = get_formatter("table").format_visualization(sample_visualization)
        assert "files written" in output
