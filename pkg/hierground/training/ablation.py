"""Component ablation ladder: Baseline, +GFCMA, +CMHM, +PPC w/o HPC, +PPC."""

from __future__ import annotations

import csv
import io
import logging
import os
from dataclasses import dataclass, field
from typing import Any

from hierground.config import RunConfig
from hierground.training.acceptance import (
    AMBIGUOUS_SUBSET,
    AcceptanceReport,
    HierarchyBenefit,
    ambiguous_head_samples,
    evaluate_acceptance,
    run_hierarchy_benefit,
)
from hierground.training.experiment import ExperimentData, ExperimentResult, SeedSummary, run_experiment, slug

logger = logging.getLogger("hierground.training.ablation")

# Row name -> ablation flags. Order is the ladder order, weakest first.
ABLATION_LADDER: dict[str, dict[str, bool]] = {
    "Baseline": {"disable_gfcma": True, "disable_cmhm": True, "disable_ppc": True, "disable_hpc": False},
    "+GFCMA": {"disable_gfcma": False, "disable_cmhm": True, "disable_ppc": True, "disable_hpc": False},
    "+CMHM": {"disable_gfcma": False, "disable_cmhm": False, "disable_ppc": True, "disable_hpc": False},
    "+PPC w/o HPC": {"disable_gfcma": False, "disable_cmhm": False, "disable_ppc": False, "disable_hpc": True},
    "+PPC": {"disable_gfcma": False, "disable_cmhm": False, "disable_ppc": False, "disable_hpc": False},
}

ABLATION_COLUMNS = ("configuration", "mean_prec_at_0.5", "std_prec_at_0.5")


def ladder_config(base: RunConfig, name: str) -> RunConfig:
    try:
        flags = ABLATION_LADDER[name]
    except KeyError as e:
        raise ValueError(f"Unknown ablation row: {name}. Available: {', '.join(ABLATION_LADDER)}") from e
    return base.replace(**flags)


@dataclass
class AblationTable:
    rows: list[SeedSummary] = field(default_factory=list)
    inversions: list[tuple[str, str]] = field(default_factory=list)
    hierarchy: HierarchyBenefit | None = None
    acceptance: AcceptanceReport | None = None

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(ABLATION_COLUMNS)
        for row in self.rows:
            writer.writerow([row.name, f"{row.mean:.6f}", f"{row.std:.6f}"])
        return buf.getvalue()

    def to_dict(self) -> dict[str, Any]:
        return {
            "rows": [
                {"configuration": r.name, "mean_prec_at_0.5": r.mean, "std_prec_at_0.5": r.std, "values": r.values}
                for r in self.rows
            ],
            "inversions": [list(pair) for pair in self.inversions],
            "acceptance": None if self.acceptance is None else self.acceptance.to_dict(),
        }


def find_inversions(rows: list[SeedSummary]) -> list[tuple[str, str]]:
    """Adjacent ladder rows where the stronger configuration scored lower."""
    return [(a.name, b.name) for a, b in zip(rows, rows[1:]) if b.mean < a.mean]


def run_ablation(
    base: RunConfig,
    seeds: int = 3,
    out_root: str | None = None,
    data: ExperimentData | None = None,
    acceptance: bool = True,
) -> AblationTable:
    """Train and test every ladder row over ``seeds`` run seeds.

    Rows share the scene data and, per seed index, the shuffle order. With
    ``acceptance`` the full model is also compared against a matcher-less
    variant on ambiguous depth-2 scenes and every threshold is evaluated.
    """
    out_root = out_root or base.effective_output_dir
    data = data or ExperimentData.generate(base)
    subsets = {AMBIGUOUS_SUBSET: ambiguous_head_samples(data.test)} if acceptance else None
    table = AblationTable()
    full_results: list[ExperimentResult] = []
    for name in ABLATION_LADDER:
        summary = SeedSummary(name=name)
        for k in range(seeds):
            cfg = ladder_config(base, name).replace(
                seed=base.seed + k,
                output_dir=os.path.join(out_root, slug(name), f"seed{base.seed + k}"),
            )
            is_full = name == "+PPC"
            result = run_experiment(cfg, data, subsets=subsets if is_full else None)
            if is_full:
                full_results.append(result)
            summary.values.append(result.test.prec)
        logger.info("%s: %.4f +- %.4f over %d seeds", name, summary.mean, summary.std, seeds)
        table.rows.append(summary)
    table.inversions = find_inversions(table.rows)
    for weaker, stronger in table.inversions:
        logger.warning("ablation inversion: %s scored below %s", stronger, weaker)
    if acceptance:
        table.hierarchy = run_hierarchy_benefit(base, seeds, out_root, data, full_results=full_results)
        table.acceptance = evaluate_acceptance(
            table.rows[-1],
            baseline=table.rows[0],
            hierarchy=table.hierarchy,
            concentration=[r.test.attn_nondecreasing_frac for r in full_results],
        )
    return table
