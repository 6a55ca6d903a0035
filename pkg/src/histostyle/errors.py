"""Exception types shared across the package.

Plain ``ValueError`` is used for shape/argument rejections; the classes here
cover the named failure modes of file formats, score records, and numerics.
"""


class HistostyleError(Exception):
    """Base class for package-specific errors."""


class FormatError(HistostyleError):
    """A file does not conform to its documented format (magic, CRC, layout)."""


class IncompatibleWeightsError(HistostyleError):
    """A weight file parsed fine but does not match the expected architecture."""

    def __init__(self, layer: str, message: str):
        super().__init__(f"{layer}: {message}")
        self.layer = layer


class ValidationError(HistostyleError):
    """A score record failed validation; ``row`` is 1-based when known."""

    def __init__(self, message: str, row: int | None = None, field: str | None = None):
        loc = f"row {row}: " if row is not None else ""
        super().__init__(f"{loc}{message}")
        self.message = message
        self.row = row
        self.field = field


class DuplicateScoreError(HistostyleError):
    """A (rater_id, image_id) pair was scored more than once."""

    def __init__(self, rater_id: str, image_id: str, row: int | None = None):
        loc = f" (row {row})" if row is not None else ""
        super().__init__(f"duplicate score for rater {rater_id!r}, image {image_id!r}{loc}")
        self.rater_id = rater_id
        self.image_id = image_id
        self.row = row


class DegenerateSignalError(HistostyleError):
    """A statistical test received data it cannot meaningfully evaluate."""


class NumericError(HistostyleError):
    """An iterative numeric routine failed to converge within its budget."""
