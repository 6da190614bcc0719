"""Min-max normalization of raw telemetry onto the score scale.

Every criterion is mapped with the same ascending rule

    x_norm = ms * (x - x_min) / (x_max - x_min)

clamped to [0, ms]. The score formulas decide signs themselves (costs are
subtracted, benefits added), so cost and benefit criteria share the map; the
Direction argument exists so call sites state which role a value plays.

Bounds come from the dataset window under analysis, never from fixed
constants, which keeps scores comparable only within a window by design.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .errors import EmptyDatasetError, InvalidBoundsError, MissingCriterionError
from .model import CRITERION_DIRECTIONS, SAMPLE_CRITERIA, Direction, MetricSample

DEFAULT_MS = 100.0


def clamp(value: float, lo: float, hi: float) -> float:
    return lo if value < lo else hi if value > hi else value


def normalize(
    value: float,
    bounds: tuple[float, float],
    ms: float = DEFAULT_MS,
    direction: Direction = Direction.COST,
) -> float:
    """Map a raw value into [0, ms] relative to its window bounds.

    A degenerate window (x_min == x_max) carries no ordering information,
    so every value maps to the midpoint ms/2. Values outside the window
    clamp to the ends rather than extrapolate.
    """
    lo, hi = bounds
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise InvalidBoundsError(f"bounds must be finite, got ({lo!r}, {hi!r})")
    if lo > hi:
        raise InvalidBoundsError(f"lower bound {lo!r} above upper bound {hi!r}")
    if not math.isfinite(value):
        raise InvalidBoundsError(f"cannot normalize non-finite value {value!r}")
    if ms <= 0 or not math.isfinite(ms):
        raise InvalidBoundsError(f"scale ms must be positive and finite, got {ms!r}")
    del direction  # same ascending map either way; see module docstring
    if lo == hi:
        return ms * 0.5
    # ratio first so value == hi lands on ms exactly, not ms minus an ulp
    return clamp(ms * ((value - lo) / (hi - lo)), 0.0, ms)


@dataclass(frozen=True, slots=True)
class NormalizationBounds:
    """Per-criterion (min, max) pairs for one dataset window."""

    limits: Mapping[str, tuple[float, float]]
    ms: float = DEFAULT_MS

    def pair(self, criterion: str) -> tuple[float, float]:
        try:
            return self.limits[criterion]
        except KeyError:
            raise MissingCriterionError(criterion, "bounds table") from None


def derive_bounds(samples: Iterable[MetricSample], ms: float = DEFAULT_MS) -> NormalizationBounds:
    """Observed min/max of each criterion across the window.

    Raises EmptyDatasetError when the window holds nothing; bounds from
    nothing would be arbitrary and silently wrong.
    """
    lows: dict[str, float] = {}
    highs: dict[str, float] = {}
    seen = False
    for sample in samples:
        seen = True
        for criterion, value in sample.criteria().items():
            if criterion not in lows or value < lows[criterion]:
                lows[criterion] = value
            if criterion not in highs or value > highs[criterion]:
                highs[criterion] = value
    if not seen:
        raise EmptyDatasetError("cannot derive bounds from an empty window")
    return NormalizationBounds(
        {c: (lows[c], highs[c]) for c in SAMPLE_CRITERIA}, ms)


def bounds_from_arrays(mins: np.ndarray, maxs: np.ndarray, ms: float = DEFAULT_MS) -> NormalizationBounds:
    """Bounds table from per-criterion min/max arrays in SAMPLE_CRITERIA order."""
    limits = {c: (float(mins[i]), float(maxs[i])) for i, c in enumerate(SAMPLE_CRITERIA)}
    return NormalizationBounds(limits, ms)


def normalize_sample(sample: MetricSample, bounds: NormalizationBounds) -> dict[str, float]:
    """All eight criteria of one sample normalized against the window."""
    raw = sample.criteria()
    return {
        criterion: normalize(
            raw[criterion], bounds.pair(criterion), bounds.ms,
            CRITERION_DIRECTIONS[criterion],
        )
        for criterion in SAMPLE_CRITERIA
    }


class WindowNormalizer(TransformerMixin, BaseEstimator):
    """Estimator wrapper over derive_bounds/normalize.

    fit() learns the window bounds from a sequence of MetricSample,
    transform() maps samples to an (n, 8) array of normalized criteria in
    SAMPLE_CRITERIA order. Mainly useful for feeding sample windows into
    array-oriented tooling; the scoring engine uses the plain functions.
    """

    def __init__(self, ms: float = DEFAULT_MS):
        self.ms = ms

    def fit(self, X: Iterable[MetricSample], y=None):
        samples = list(X)
        if not samples:
            raise EmptyDatasetError("cannot fit WindowNormalizer on an empty window")
        self.bounds_ = derive_bounds(samples, self.ms)
        self.n_features_in_ = len(SAMPLE_CRITERIA)
        return self

    def transform(self, X: Iterable[MetricSample]) -> np.ndarray:
        check_is_fitted(self, "bounds_")
        rows = [
            [normalized[c] for c in SAMPLE_CRITERIA]
            for normalized in (normalize_sample(s, self.bounds_) for s in X)
        ]
        return np.asarray(rows, dtype=float).reshape(-1, len(SAMPLE_CRITERIA))

    def get_feature_names_out(self, input_features=None) -> np.ndarray:
        return np.asarray(SAMPLE_CRITERIA, dtype=object)
