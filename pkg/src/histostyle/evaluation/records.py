"""Score records and their CSV serialization.

The CSV header is a wire contract shared with the review service and
frontend; it must match byte-for-byte.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from datetime import datetime
from typing import Iterable, List, Union

from ..errors import DuplicateScoreError, FormatError, ValidationError
from ..images import ColorMode

CSV_HEADER = "rater_id,image_id,color_mode,removed_artifacts,added_structures,timestamp_utc"
VALID_SCORES = frozenset(range(7))


@dataclass(frozen=True)
class ScoreRecord:
    rater_id: str
    image_id: str
    color_mode: ColorMode
    removed_artifacts: int
    added_structures: int
    timestamp_utc: str

    def __post_init__(self):
        if not self.rater_id:
            raise ValidationError("rater_id must be non-empty", field="rater_id")
        if not self.image_id:
            raise ValidationError("image_id must be non-empty", field="image_id")
        for name in ("removed_artifacts", "added_structures"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value not in VALID_SCORES:
                raise ValidationError(
                    f"{name} must be an integer in 0..6, got {value!r}", field=name
                )
        if not isinstance(self.color_mode, ColorMode):
            raise ValidationError(
                f"color_mode must be one of {[m.value for m in ColorMode]}",
                field="color_mode",
            )
        _check_timestamp(self.timestamp_utc)


def _check_timestamp(value: str) -> None:
    try:
        datetime.fromisoformat(value.replace("Z", "+00:00"))
    except (ValueError, AttributeError):
        raise ValidationError(
            f"timestamp_utc is not an ISO-8601 instant: {value!r}",
            field="timestamp_utc",
        ) from None


def _parse_int_field(raw: str, name: str, row: int) -> int:
    text = raw.strip()
    if not text.lstrip("-").isdigit():
        raise ValidationError(
            f"{name} must be an integer score, got {raw!r}", row=row, field=name
        )
    return int(text)


def parse_scores(data: Union[bytes, str]) -> List[ScoreRecord]:
    """Parse and validate a scores CSV; errors carry the 1-based row."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    lines = text.splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise FormatError(
            f"scores file must start with the exact header {CSV_HEADER!r}"
        )
    reader = csv.reader(io.StringIO(text))
    next(reader)  # header, already checked byte-exactly above
    records: List[ScoreRecord] = []
    seen = {}
    for row_number, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 6:
            raise ValidationError(
                f"expected 6 fields, got {len(row)}", row=row_number
            )
        rater_id, image_id, mode_raw, removed_raw, added_raw, timestamp = row
        try:
            mode = ColorMode(mode_raw)
        except ValueError:
            raise ValidationError(
                f"unknown color_mode {mode_raw!r}", row=row_number, field="color_mode"
            ) from None
        removed = _parse_int_field(removed_raw, "removed_artifacts", row_number)
        added = _parse_int_field(added_raw, "added_structures", row_number)
        try:
            record = ScoreRecord(rater_id, image_id, mode, removed, added, timestamp)
        except ValidationError as exc:
            raise ValidationError(exc.message, row=row_number, field=exc.field) from None
        key = (record.rater_id, record.image_id)
        if key in seen:
            raise DuplicateScoreError(record.rater_id, record.image_id, row_number)
        seen[key] = row_number
        records.append(record)
    return records


def serialize_scores(records: Iterable[ScoreRecord]) -> str:
    """Records back to CSV text, inverse of parse_scores."""
    out = io.StringIO()
    out.write(CSV_HEADER + "\n")
    writer = csv.writer(out, lineterminator="\n")
    for record in records:
        writer.writerow(format_row(record))
    return out.getvalue()


def format_row(record: ScoreRecord) -> List[str]:
    return [
        record.rater_id,
        record.image_id,
        record.color_mode.value,
        str(record.removed_artifacts),
        str(record.added_structures),
        record.timestamp_utc,
    ]
