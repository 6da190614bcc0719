"""Exception types shared across the package.

Everything raised on purpose derives from QersError so callers can catch
one base class at API boundaries. Validation errors carry the offending
field or criterion name because batch ingestion reports them per row.
"""

from __future__ import annotations


class QersError(Exception):
    """Base class for all errors raised by this package."""


class EmptyDatasetError(QersError):
    """An operation that needs at least one sample received none."""


class InvalidBoundsError(QersError):
    """Normalization bounds are malformed (non-finite, or min above max)."""


class MissingCriterionError(QersError):
    """A required criterion is absent from a bounds table or vector."""

    def __init__(self, criterion: str, where: str = "") -> None:
        self.criterion = criterion
        suffix = f" in {where}" if where else ""
        super().__init__(f"missing criterion {criterion!r}{suffix}")


class InvalidWeightsError(QersError):
    """A weight preset violates its validation rules."""


class SampleValidationError(QersError):
    """A metric sample violates a field constraint."""

    def __init__(self, field: str, reason: str) -> None:
        self.field = field
        self.reason = reason
        super().__init__(f"invalid sample field {field!r}: {reason}")


class ScoreRangeError(QersError):
    """A score fell outside [0, ms] where an in-range score was required."""


class InsufficientDataError(QersError):
    """Too few rows to fit the requested estimator."""


class InsufficientGroupDataError(QersError):
    """A (algorithm, scenario) group has too few rows to characterize."""


class TooFewTreesError(QersError):
    """Forest configured with fewer than one tree."""


class MissingFeatureError(QersError):
    """A prediction input lacks a feature the model was trained on."""

    def __init__(self, feature: str) -> None:
        self.feature = feature
        super().__init__(f"missing feature {feature!r}")


class FeatureMismatchError(QersError):
    """A stored model's feature order differs from what the caller expects."""


class ModelFormatError(QersError):
    """A model file is unreadable or has an unsupported format version."""


class CsvParseError(QersError):
    """A CSV row failed to parse. Carries the 1-based line number."""

    def __init__(self, line: int, reason: str) -> None:
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class UnknownHeaderError(QersError):
    """A CSV file's header does not match the wire format."""


class ConfigError(QersError):
    """A configuration file is malformed."""


class UnknownPresetError(QersError):
    """A preset name is not in the catalog."""

    def __init__(self, name: str) -> None:
        self.name = name
        super().__init__(f"unknown preset {name!r}")
