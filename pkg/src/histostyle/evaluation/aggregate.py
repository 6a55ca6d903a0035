"""Aggregation of rater scores: histograms, intensity map, categories, tests.

Everything here is plain-Python integer counting over immutable record lists,
so the outputs drop straight into JSON without conversion.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from ..errors import DegenerateSignalError
from ..images import ColorMode
from .records import ScoreRecord
from .stats import chi_square_gof, paired_t_test, welch_t_test

SCORE_BINS = 7

CATEGORY_LABELS = ("negative", "neutral", "positive")

BUCKET_NAMES = (
    "both_positive",
    "only_removed_positive",
    "only_added_positive",
    "only_removed_negative",
    "only_added_negative",
    "both_negative",
)


def _classify(total: int, count: int) -> str:
    """Category of a mean score, decided in integers so 3.0 is exactly neutral."""
    pivot = 3 * count
    if total < pivot:
        return "negative"
    if total > pivot:
        return "positive"
    return "neutral"


def score_histograms(records: Sequence[ScoreRecord]) -> Dict[str, Dict[str, object]]:
    """Per-property 7-bin histograms, overall and split by color mode."""
    histograms: Dict[str, Dict[str, object]] = {}
    for prop in ("removed_artifacts", "added_structures"):
        overall = [0] * SCORE_BINS
        by_mode = {mode.value: [0] * SCORE_BINS for mode in ColorMode}
        for record in records:
            score = getattr(record, prop)
            overall[score] += 1
            by_mode[record.color_mode.value][score] += 1
        histograms[prop] = {"overall": overall, "by_color_mode": by_mode}
    return histograms


def intensity_map(records: Sequence[ScoreRecord]) -> List[List[int]]:
    """7x7 count matrix; cell [added][removed] counts records with that pair."""
    matrix = [[0] * SCORE_BINS for _ in range(SCORE_BINS)]
    for record in records:
        matrix[record.added_structures][record.removed_artifacts] += 1
    return matrix


def map_mode(matrix: Sequence[Sequence[int]]) -> Optional[Tuple[int, int]]:
    """Most frequent (added, removed) pair, or None for an all-zero map.

    Ties resolve to the first cell in row-major scan order.
    """
    best: Optional[Tuple[int, int]] = None
    best_count = 0
    for a in range(SCORE_BINS):
        for r in range(SCORE_BINS):
            if matrix[a][r] > best_count:
                best_count = matrix[a][r]
                best = (a, r)
    return best


def _image_sums(
    records: Sequence[ScoreRecord],
) -> Dict[str, Tuple[int, int, int]]:
    """image_id -> (rating_count, removed_sum, added_sum), sorted by id."""
    sums: Dict[str, Tuple[int, int, int]] = {}
    for record in records:
        count, removed, added = sums.get(record.image_id, (0, 0, 0))
        sums[record.image_id] = (
            count + 1,
            removed + record.removed_artifacts,
            added + record.added_structures,
        )
    return dict(sorted(sums.items()))


def per_image_means(
    records: Sequence[ScoreRecord],
) -> Dict[str, Dict[str, object]]:
    """Mean removed/added score per image over however many raters saw it."""
    means: Dict[str, Dict[str, object]] = {}
    for image_id, (count, removed, added) in _image_sums(records).items():
        means[image_id] = {
            "rating_count": count,
            "removed_artifacts": removed / count,
            "added_structures": added / count,
        }
    return means


@dataclass(frozen=True)
class CategoryCounts:
    """3x3 joint classification of per-image means, plus named buckets.

    joint[removed_category][added_category] is a disjoint decomposition of
    the images.  The named buckets deliberately overlap (an image with
    removed mean above 3 and added mean below 3 is both only_removed_positive
    and only_added_negative), so their sum can exceed image_count; derive any
    disjoint convention from ``joint``.
    """

    image_count: int
    joint: Dict[str, Dict[str, int]]
    buckets: Dict[str, int]


def categorize_images(records: Sequence[ScoreRecord]) -> CategoryCounts:
    joint = {r: {a: 0 for a in CATEGORY_LABELS} for r in CATEGORY_LABELS}
    buckets = {name: 0 for name in BUCKET_NAMES}
    sums = _image_sums(records)
    for count, removed_sum, added_sum in sums.values():
        removed = _classify(removed_sum, count)
        added = _classify(added_sum, count)
        joint[removed][added] += 1
        if removed == "positive" and added == "positive":
            buckets["both_positive"] += 1
        if removed == "positive" and added != "positive":
            buckets["only_removed_positive"] += 1
        if added == "positive" and removed != "positive":
            buckets["only_added_positive"] += 1
        if removed == "negative" and added != "negative":
            buckets["only_removed_negative"] += 1
        if added == "negative" and removed != "negative":
            buckets["only_added_negative"] += 1
        if removed == "negative" and added == "negative":
            buckets["both_negative"] += 1
    return CategoryCounts(image_count=len(sums), joint=joint, buckets=buckets)


def _chi_square_entry(positive: int, rest: int) -> Dict[str, object]:
    statistic, p_value = chi_square_gof((positive, rest))
    return {
        "observed": [positive, rest],
        "statistic": statistic,
        "df": 1,
        "p_value": p_value,
    }


def _positive_share_tests(
    records: Sequence[ScoreRecord],
) -> Dict[str, Dict[str, object]]:
    """Chi-square of positive-vs-rest, once per rating and once per image mean.

    Which unit of analysis is the right one depends on the study design, so
    both are reported.
    """
    per_rating = {}
    for prop in ("removed_artifacts", "added_structures"):
        positive = sum(1 for rec in records if getattr(rec, prop) > 3)
        per_rating[prop] = _chi_square_entry(positive, len(records) - positive)

    sums = _image_sums(records)
    per_image = {}
    for prop_index, prop in enumerate(("removed_artifacts", "added_structures")):
        positive = sum(
            1
            for count, removed_sum, added_sum in sums.values()
            if (removed_sum, added_sum)[prop_index] > 3 * count
        )
        per_image[prop] = _chi_square_entry(positive, len(sums) - positive)
    return {"per_rating": per_rating, "per_image_mean": per_image}


def build_report(
    records: Sequence[ScoreRecord], include_welch: bool = False
) -> Dict[str, object]:
    """Full aggregate report as a JSON-ready dict."""
    matrix = intensity_map(records)
    categories = categorize_images(records)

    report: Dict[str, object] = {
        "record_count": len(records),
        "rater_count": len({rec.rater_id for rec in records}),
        "image_count": categories.image_count,
        "histograms": score_histograms(records),
        "intensity_map": matrix,
        "intensity_map_mode": map_mode(matrix),
        "per_image_means": per_image_means(records),
        "categories": {
            "image_count": categories.image_count,
            "joint": categories.joint,
            "buckets": categories.buckets,
        },
    }

    tests: Dict[str, object] = {
        "chi_square_positive_share": None,
        "paired_t_added_vs_removed": None,
    }
    if records:
        tests["chi_square_positive_share"] = _positive_share_tests(records)
    if len(records) >= 2:
        added = [rec.added_structures for rec in records]
        removed = [rec.removed_artifacts for rec in records]
        try:
            statistic, df, p_value = paired_t_test(added, removed)
            tests["paired_t_added_vs_removed"] = {
                "statistic": statistic,
                "df": df,
                "p_value": p_value,
            }
        except DegenerateSignalError as exc:
            tests["paired_t_added_vs_removed"] = {"degenerate": True, "detail": str(exc)}
        if include_welch:
            try:
                statistic, df, p_value = welch_t_test(added, removed)
                tests["welch_t_added_vs_removed"] = {
                    "statistic": statistic,
                    "df": df,
                    "p_value": p_value,
                }
            except DegenerateSignalError as exc:
                tests["welch_t_added_vs_removed"] = {
                    "degenerate": True,
                    "detail": str(exc),
                }
    report["tests"] = tests
    return report
