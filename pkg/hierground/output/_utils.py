"""Shared utilities for output formatters."""

from __future__ import annotations

import math


def fmt_score(value: float | None, digits: int = 4) -> str:
    """Format a score, rendering missing or NaN values as "-".

    Args:
        value: Score in [0, 1], or None when not measured.
        digits: Decimal places.

    Returns:
        Formatted string like "0.8125".
    """
    if value is None or math.isnan(value):
        return "-"
    return f"{value:.{digits}f}"


def fmt_mean_std(mean: float, std: float) -> str:
    return f"{fmt_score(mean)} +- {fmt_score(std)}"
