"""One-parameter sweeps over the grounding hyperparameters."""

from __future__ import annotations

import csv
import io
import logging
import os
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

from hierground.config import RunConfig
from hierground.errors import ConfigurationError
from hierground.training.experiment import ExperimentData, SeedSummary, run_experiment

logger = logging.getLogger("hierground.training.sweep")

SWEEP_PARAMS: dict[str, type] = {
    "iterations": int,
    "hier_lambda": float,
    "lambda1": float,
    "lambda2": float,
    "inverse_temperature": float,
}

SWEEP_COLUMNS = ("param", "value", "mean_prec_at_0.5", "std_prec_at_0.5")


def parse_values(param: str, raw: str) -> list[Any]:
    """Parse a comma-separated value list for ``param``."""
    if param not in SWEEP_PARAMS:
        raise ConfigurationError(f"cannot sweep {param!r}; choose from {', '.join(SWEEP_PARAMS)}")
    cast = SWEEP_PARAMS[param]
    try:
        values = [cast(v.strip()) for v in raw.split(",") if v.strip()]
    except ValueError as e:
        raise ConfigurationError(f"bad value list {raw!r} for {param}: {e}") from e
    if not values:
        raise ConfigurationError(f"no values given for {param}")
    return values


@dataclass
class SweepTable:
    param: str
    rows: list[tuple[Any, SeedSummary]] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(SWEEP_COLUMNS)
        for value, summary in self.rows:
            writer.writerow([self.param, value, f"{summary.mean:.6f}", f"{summary.std:.6f}"])
        return buf.getvalue()

    def to_dict(self) -> dict[str, Any]:
        return {
            "param": self.param,
            "rows": [
                {"value": v, "mean_prec_at_0.5": s.mean, "std_prec_at_0.5": s.std, "values": s.values}
                for v, s in self.rows
            ],
        }


def run_sweep(
    base: RunConfig,
    param: str,
    values: Sequence[Any],
    seeds: int = 1,
    out_root: str | None = None,
    data: ExperimentData | None = None,
) -> SweepTable:
    if param not in SWEEP_PARAMS:
        raise ConfigurationError(f"cannot sweep {param!r}; choose from {', '.join(SWEEP_PARAMS)}")
    out_root = out_root or base.effective_output_dir
    data = data or ExperimentData.generate(base)
    table = SweepTable(param=param)
    for value in values:
        summary = SeedSummary(name=f"{param}={value}")
        for k in range(seeds):
            cfg = base.replace(
                **{param: value},
                seed=base.seed + k,
                output_dir=os.path.join(out_root, f"{param}_{value}", f"seed{base.seed + k}"),
            )
            summary.values.append(run_experiment(cfg, data).test.prec)
        logger.info("%s = %s: %.4f +- %.4f", param, value, summary.mean, summary.std)
        table.rows.append((value, summary))
    return table
