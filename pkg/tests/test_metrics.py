"""Tests for IoU, precision and the metric report."""

import math

import numpy as np
import pytest

from hierground.errors import InputError
from hierground.training.metrics import MetricReport, box_iou, build_report, mean_iou, prec_at_iou

GT = (0.5, 0.5, 0.5, 0.5)
# nested box covering exactly half of GT
HALF = (0.5, 0.5, 0.5, 0.25)


def monte_carlo_iou(a, b, rng, samples=250_000):
    """Rasterize both boxes with uniform points over their hull."""
    a, b = np.asarray(a), np.asarray(b)
    lo = np.minimum(a[:2] - a[2:] / 2, b[:2] - b[2:] / 2)
    hi = np.maximum(a[:2] + a[2:] / 2, b[:2] + b[2:] / 2)
    pts = rng.uniform(lo, hi, size=(samples, 2))
    in_a = np.all(np.abs(pts - a[:2]) <= a[2:] / 2, axis=1)
    in_b = np.all(np.abs(pts - b[:2]) <= b[2:] / 2, axis=1)
    return np.count_nonzero(in_a & in_b) / max(np.count_nonzero(in_a | in_b), 1)


class TestBoxIoU:
    def test_identical(self):
        assert box_iou(GT, GT) == pytest.approx(1.0)

    def test_disjoint(self):
        assert box_iou((0.2, 0.2, 0.1, 0.1), (0.8, 0.8, 0.1, 0.1)) == 0.0

    def test_exact_half(self):
        assert box_iou(HALF, GT) == 0.5

    def test_zero_area_pair(self):
        assert box_iou((0.5, 0.5, 0.0, 0.0), (0.5, 0.5, 0.0, 0.0)) == 0.0


class TestPrecision:
    def test_all_correct(self):
        assert prec_at_iou([GT, GT], [GT, GT]) == 1.0

    def test_disjoint_only(self):
        assert prec_at_iou([(0.1, 0.1, 0.1, 0.1)], [(0.9, 0.9, 0.1, 0.1)]) == 0.0

    def test_threshold_is_exclusive_by_default(self):
        assert prec_at_iou([HALF], [GT]) == 0.0
        assert prec_at_iou([HALF], [GT], inclusive=True) == 1.0

    def test_empty_lists(self):
        with pytest.raises(InputError):
            prec_at_iou([], [])

    def test_length_mismatch(self):
        with pytest.raises(InputError):
            mean_iou([GT], [GT, GT])

    def test_mean_iou(self):
        assert mean_iou([GT, HALF], [GT, GT]) == pytest.approx(0.75)

    @pytest.mark.slow
    def test_agrees_with_monte_carlo_oracle(self, rng):
        predictions, gts, oracle_hits = [], [], []
        while len(predictions) < 500:
            gt = np.concatenate([rng.uniform(0.3, 0.7, 2), rng.uniform(0.2, 0.5, 2)])
            pred = gt + np.concatenate([rng.uniform(-0.15, 0.15, 2), rng.uniform(-0.15, 0.15, 2)])
            pred[2:] = np.maximum(pred[2:], 0.02)
            exact = box_iou(pred, gt)
            if abs(exact - 0.5) < 0.01:
                continue
            estimate = monte_carlo_iou(pred, gt, rng)
            assert estimate == pytest.approx(exact, abs=0.01)
            assert (estimate > 0.5) == (exact > 0.5)
            predictions.append(pred)
            gts.append(gt)
            oracle_hits.append(estimate > 0.5)
        assert 0 < sum(oracle_hits) < len(oracle_hits)
        assert prec_at_iou(predictions, gts) == pytest.approx(np.mean(oracle_hits))


class TestReport:
    def test_per_depth_precision(self):
        report = build_report(
            "run",
            "test",
            predictions=[GT, HALF, GT, (0.1, 0.1, 0.1, 0.1)],
            gts=[GT, GT, GT, GT],
            depths=[1, 1, 2, 3],
        )
        assert report.count == 4
        assert report.prec == 0.5
        assert report.per_depth == {1: (0.5, 2), 2: (1.0, 1), 3: (0.0, 1)}

    def test_missing_depth_is_omitted(self):
        report = build_report("run", "test", [GT], [GT], depths=[2])
        assert set(report.per_depth) == {2}
        row = dict(zip(report.csv_header(), report.csv_row()))
        assert row["count_depth1"] == "0"
        assert math.isnan(float(row["prec_depth1"]))

    def test_depth_labels_must_align(self):
        with pytest.raises(InputError):
            build_report("run", "test", [GT], [GT], depths=[1, 2])

    def test_csv_header(self):
        report = MetricReport(run_id="r", split="test", prec=1.0, mean_iou=1.0, count=1)
        assert report.csv_header() == [
            "run_id",
            "split",
            "prec_at_0.5",
            "mean_iou",
            "prec_depth1",
            "count_depth1",
            "prec_depth2",
            "count_depth2",
            "prec_depth3",
            "count_depth3",
            "attn_nondecreasing_frac",
        ]
        assert report.csv_row()[-1] == ""

    def test_to_dict_keys_depths_as_strings(self):
        report = build_report("run", "val", [GT], [GT], depths=[3], attn_nondecreasing_frac=0.75)
        data = report.to_dict()
        assert data["per_depth"] == {"3": {"prec": 1.0, "count": 1}}
        assert data["attn_nondecreasing_frac"] == 0.75
