"""Acceptance thresholds for trained runs.

Four checks are evaluated after an ablation ladder: every full-model seed
reaches the precision target, the full model beats the baseline by a fixed
margin, the hierarchical matcher helps on depth-2 scenes whose head phrase
alone is ambiguous, and attention concentrates on the target across levels.
"""

from __future__ import annotations

import logging
import math
import os
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

from hierground.config import RunConfig
from hierground.data.scenes import satisfiers
from hierground.training.experiment import ExperimentData, SeedSummary, run_experiment, slug

if TYPE_CHECKING:
    from hierground.data.dataset import Sample
    from hierground.training.experiment import ExperimentResult

logger = logging.getLogger("hierground.training.acceptance")

PREC_TARGET = 0.85
LADDER_GAP = 0.05
HIERARCHY_GAP = 0.05
CONCENTRATION_TARGET = 0.60

AMBIGUOUS_SUBSET = "ambiguous_depth2"
NO_MATCHER_ROW = "+PPC w/o CMHM"

ACCEPTANCE_COLUMNS = ("check", "value", "threshold", "status")


@dataclass
class AcceptanceCheck:
    """One threshold; ``value`` is None when the run could not measure it."""

    name: str
    value: float | None
    threshold: float

    @property
    def status(self) -> str:
        if self.value is None or math.isnan(self.value):
            return "skipped"
        return "pass" if self.value >= self.threshold else "fail"

    def to_dict(self) -> dict[str, Any]:
        return {"check": self.name, "value": self.value, "threshold": self.threshold, "status": self.status}


@dataclass
class AcceptanceReport:
    checks: list[AcceptanceCheck] = field(default_factory=list)

    @property
    def failures(self) -> list[AcceptanceCheck]:
        return [c for c in self.checks if c.status == "fail"]

    @property
    def passed(self) -> bool:
        return not self.failures

    def rows(self) -> list[list[str]]:
        return [
            [c.name, "" if c.value is None else f"{c.value:.6f}", f"{c.threshold:.6f}", c.status]
            for c in self.checks
        ]

    def to_dict(self) -> dict[str, Any]:
        return {"passed": self.passed, "checks": [c.to_dict() for c in self.checks]}


@dataclass
class HierarchyBenefit:
    """Precision of the full and matcher-less models on the ambiguous depth-2 subset."""

    full: SeedSummary
    without_matcher: SeedSummary
    count: int = 0

    @property
    def gap(self) -> float | None:
        if not self.full.values or not self.without_matcher.values:
            return None
        return self.full.mean - self.without_matcher.mean


def is_head_ambiguous(sample: Sample) -> bool:
    """True when the first phrase alone describes more than one object."""
    scene = sample.scene
    head = scene.decomposition.phrases[0]
    return len(satisfiers(scene.objects, scene.expression[: head.end])) > 1


def ambiguous_head_samples(samples: Sequence[Sample], depth: int = 2) -> list[Sample]:
    return [s for s in samples if s.depth == depth and is_head_ambiguous(s)]


def full_config(base: RunConfig) -> RunConfig:
    return base.replace(disable_gfcma=False, disable_cmhm=False, disable_ppc=False, disable_hpc=False)


def _subset_prec(result: ExperimentResult) -> float | None:
    report = result.subsets.get(AMBIGUOUS_SUBSET)
    return None if report is None else report.prec


def run_hierarchy_benefit(
    base: RunConfig,
    seeds: int = 3,
    out_root: str | None = None,
    data: ExperimentData | None = None,
    full_results: Sequence[ExperimentResult] | None = None,
) -> HierarchyBenefit:
    """Compare the full model against the same model without hierarchical matching.

    Both are scored on depth-2 test scenes whose head phrase is ambiguous.
    ``full_results`` reuses already trained full-model runs, one per seed.
    """
    out_root = out_root or base.effective_output_dir
    data = data or ExperimentData.generate(base)
    subset = ambiguous_head_samples(data.test)
    subsets = {AMBIGUOUS_SUBSET: subset}
    full = full_config(base)
    benefit = HierarchyBenefit(SeedSummary("+PPC"), SeedSummary(NO_MATCHER_ROW), count=len(subset))
    if not subset:
        logger.warning("no depth-2 test scenes with an ambiguous head phrase; hierarchy benefit not measured")
        return benefit
    for k in range(seeds):
        seed = base.seed + k
        if full_results is not None and k < len(full_results):
            full_run = full_results[k]
        else:
            cfg = full.replace(seed=seed, output_dir=os.path.join(out_root, slug("+PPC"), f"seed{seed}"))
            full_run = run_experiment(cfg, data, subsets=subsets)
        cfg = full.replace(
            disable_cmhm=True, seed=seed, output_dir=os.path.join(out_root, slug(NO_MATCHER_ROW), f"seed{seed}")
        )
        ablated_run = run_experiment(cfg, data, subsets=subsets)
        for summary, run in ((benefit.full, full_run), (benefit.without_matcher, ablated_run)):
            prec = _subset_prec(run)
            if prec is not None:
                summary.values.append(prec)
    logger.info(
        "hierarchy benefit on %d ambiguous depth-2 scenes: %.4f vs %.4f",
        len(subset),
        benefit.full.mean,
        benefit.without_matcher.mean,
    )
    return benefit


def evaluate_acceptance(
    full: SeedSummary,
    baseline: SeedSummary | None = None,
    hierarchy: HierarchyBenefit | None = None,
    concentration: Sequence[float | None] = (),
) -> AcceptanceReport:
    """Evaluate every threshold and log a warning for each miss."""
    measured = [c for c in concentration if c is not None]
    gap = None if baseline is None or not baseline.values or not full.values else full.mean - baseline.mean
    report = AcceptanceReport(
        [
            AcceptanceCheck("min_seed_prec_at_0.5", min(full.values) if full.values else None, PREC_TARGET),
            AcceptanceCheck("full_minus_baseline", gap, LADDER_GAP),
            AcceptanceCheck("hierarchy_benefit_depth2", None if hierarchy is None else hierarchy.gap, HIERARCHY_GAP),
            AcceptanceCheck(
                "attn_nondecreasing_frac", sum(measured) / len(measured) if measured else None, CONCENTRATION_TARGET
            ),
        ]
    )
    for check in report.checks:
        if check.status == "fail":
            logger.warning("acceptance: %s = %.4f is below %.4f", check.name, check.value, check.threshold)
        elif check.status == "skipped":
            logger.info("acceptance: %s not measured", check.name)
    return report
