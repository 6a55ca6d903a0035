"""Score records, aggregates, and the statistics behind their p-values."""

from .aggregate import (
    BUCKET_NAMES,
    CATEGORY_LABELS,
    CategoryCounts,
    build_report,
    categorize_images,
    intensity_map,
    map_mode,
    per_image_means,
    score_histograms,
)
from .records import (
    CSV_HEADER,
    ScoreRecord,
    parse_scores,
    serialize_scores,
)
from .special import chi_square_sf, regularized_incomplete_beta, regularized_upper_gamma, t_sf
from .stats import chi_square_gof, paired_t_test, welch_t_test

__all__ = [
    "BUCKET_NAMES",
    "CATEGORY_LABELS",
    "CSV_HEADER",
    "CategoryCounts",
    "ScoreRecord",
    "build_report",
    "categorize_images",
    "chi_square_gof",
    "chi_square_sf",
    "intensity_map",
    "map_mode",
    "paired_t_test",
    "parse_scores",
    "per_image_means",
    "regularized_incomplete_beta",
    "regularized_upper_gamma",
    "score_histograms",
    "serialize_scores",
    "t_sf",
    "welch_t_test",
]
