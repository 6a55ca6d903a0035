"""The two hypothesis tests behind the reported significance figures."""

from __future__ import annotations

import math
from typing import Sequence, Tuple

from ..errors import DegenerateSignalError
from .special import chi_square_sf, t_sf


def chi_square_gof(observed: Tuple[int, int]) -> Tuple[float, float]:
    """One-way goodness-of-fit against a uniform split of two bins.

    Returns (statistic, p_value) with df = 1.
    """
    if len(observed) != 2:
        raise ValueError("expected exactly two bin counts")
    a, b = observed
    if a < 0 or b < 0:
        raise ValueError("bin counts must be non-negative")
    total = a + b
    if total == 0:
        raise ValueError("total count must be positive")
    expected = total / 2.0
    statistic = (a - expected) ** 2 / expected + (b - expected) ** 2 / expected
    return statistic, chi_square_sf(statistic, 1)


def paired_t_test(
    added: Sequence[float], removed: Sequence[float]
) -> Tuple[float, int, float]:
    """Paired two-sided t-test on added - removed differences.

    Returns (statistic, df, p_value).  All-zero differences give the
    well-defined no-effect answer (0, df, 1); zero variance around a
    nonzero mean has no finite statistic and raises DegenerateSignalError.
    """
    if len(added) != len(removed):
        raise ValueError("paired samples must have equal length")
    n = len(added)
    if n < 2:
        raise ValueError("need at least two pairs")
    diffs = [float(a) - float(r) for a, r in zip(added, removed)]
    # fsum: exactly-rounded, so the statistic is invariant to record order.
    mean = math.fsum(diffs) / n
    variance = math.fsum((d - mean) ** 2 for d in diffs) / (n - 1)
    df = n - 1
    if variance == 0.0:
        if mean == 0.0:
            return 0.0, df, 1.0
        raise DegenerateSignalError(
            "all differences identical and nonzero; t statistic is unbounded"
        )
    statistic = mean / math.sqrt(variance / n)
    p_value = 2.0 * t_sf(abs(statistic), df)
    return statistic, df, min(p_value, 1.0)


def welch_t_test(
    sample_a: Sequence[float], sample_b: Sequence[float]
) -> Tuple[float, float, float]:
    """Unpaired Welch t-test.  Returns (statistic, df, p_value) where df is
    the fractional Welch-Satterthwaite value."""
    n_a, n_b = len(sample_a), len(sample_b)
    if n_a < 2 or n_b < 2:
        raise ValueError("need at least two observations per sample")
    mean_a = math.fsum(sample_a) / n_a
    mean_b = math.fsum(sample_b) / n_b
    var_a = math.fsum((x - mean_a) ** 2 for x in sample_a) / (n_a - 1)
    var_b = math.fsum((x - mean_b) ** 2 for x in sample_b) / (n_b - 1)
    if var_a == 0.0 and var_b == 0.0:
        if mean_a == mean_b:
            return 0.0, float(n_a + n_b - 2), 1.0
        raise DegenerateSignalError(
            "both samples constant with different means; t statistic is unbounded"
        )
    se_sq = var_a / n_a + var_b / n_b
    statistic = (mean_a - mean_b) / math.sqrt(se_sq)
    df = se_sq**2 / (
        (var_a / n_a) ** 2 / (n_a - 1) + (var_b / n_b) ** 2 / (n_b - 1)
    )
    p_value = 2.0 * t_sf(abs(statistic), max(1.0, df))
    return statistic, df, min(p_value, 1.0)
