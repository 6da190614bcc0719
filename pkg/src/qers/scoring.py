"""Score formulas, readiness classification, smoothing, and the scoring session.

Three score variants share the [0, ms] scale:

  basic   ms - (a*latency + b*overhead + g*loss)               on normalized values
  tuned   ms - (six weighted costs) + epsilon*signal_strength  on normalized values
  fusion  share_p*(ms - P) + share_s*S  where P and S are weighted subscores
          over performance criteria and security criteria respectively

All three clamp to [0, ms] after evaluation. The fusion score also feeds the
readiness bands and is the quantity the forest regressor learns to estimate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    ConfigError,
    EmptyDatasetError,
    MissingCriterionError,
    ScoreRangeError,
)
from .model import (
    Algorithm,
    AlgorithmProfile,
    BASIC_COST_CRITERIA,
    BUILTIN_PROFILES,
    BasicPreset,
    Direction,
    FusionPreset,
    MetricSample,
    PresetTriple,
    READINESS_BANDS,
    ReadinessLevel,
    SAMPLE_CRITERIA,
    Scenario,
    ScoreRecord,
    TUNED_BENEFIT_CRITERION,
    TUNED_COST_CRITERIA,
    TunedPreset,
    default_triple,
)
from .normalization import (
    DEFAULT_MS,
    NormalizationBounds,
    bounds_from_arrays,
    clamp,
    derive_bounds,
    normalize_sample,
)


def _require(norms: Mapping[str, float], criterion: str, where: str) -> float:
    try:
        return norms[criterion]
    except KeyError:
        raise MissingCriterionError(criterion, where) from None


def score_basic(norms: Mapping[str, float], preset: BasicPreset, ms: float = DEFAULT_MS) -> float:
    """Three-cost score from normalized latency, overhead and packet loss."""
    penalty = sum(
        coef * _require(norms, criterion, "basic score")
        for criterion, coef in zip(BASIC_COST_CRITERIA, preset.cost_coefficients())
    )
    return clamp(ms - penalty, 0.0, ms)


def score_tuned(norms: Mapping[str, float], preset: TunedPreset, ms: float = DEFAULT_MS) -> float:
    """Six-cost score with a signal-strength benefit term.

    The benefit is added after the costs are subtracted, so a strong link
    can push the raw value above ms before the final clamp.
    """
    penalty = sum(
        coef * _require(norms, criterion, "tuned score")
        for criterion, coef in zip(TUNED_COST_CRITERIA, preset.cost_coefficients())
    )
    benefit = preset.epsilon * _require(norms, TUNED_BENEFIT_CRITERION, "tuned score")
    return clamp(ms - penalty + benefit, 0.0, ms)


def build_security_vector(
    norms: Mapping[str, float],
    profile: AlgorithmProfile,
    preset: FusionPreset,
    ms: float = DEFAULT_MS,
) -> dict[str, float]:
    """Security-side criteria on the [0, ms] scale for one sample.

    Key size comes from the sample via window normalization; the three
    ratings are static per algorithm and already live on the 0..100 scale,
    so they only get rescaled when ms differs from 100. Criteria the preset
    marks cost-direction are flipped (ms - value) before weighting, since
    the security subscore is additive.
    """
    scale = ms / 100.0
    vector = {
        "key_bytes": _require(norms, "key_bytes", "security vector"),
        "robustness": profile.robustness * scale,
        "proven_resistance": profile.proven_resistance * scale,
        "crypto_overhead": profile.crypto_overhead * scale,
    }
    for criterion in vector:
        if preset.direction_of(criterion) is Direction.COST:
            vector[criterion] = ms - vector[criterion]
    return vector


def fusion_components(
    perf_norms: Mapping[str, float],
    sec_vector: Mapping[str, float],
    preset: FusionPreset,
) -> tuple[float, float]:
    """(performance penalty P, security subscore S), both in [0, ms]."""
    p = sum(
        weight * _require(perf_norms, criterion, "fusion performance")
        for criterion, weight in preset.performance_weights.items()
    )
    s = sum(
        weight * _require(sec_vector, criterion, "fusion security")
        for criterion, weight in preset.security_weights.items()
    )
    return p, s


def score_fusion(
    perf_norms: Mapping[str, float],
    sec_vector: Mapping[str, float],
    preset: FusionPreset,
    ms: float = DEFAULT_MS,
) -> float:
    p, s = fusion_components(perf_norms, sec_vector, preset)
    return clamp(preset.performance_share * (ms - p) + preset.security_share * s, 0.0, ms)


def classify(score: float, ms: float = DEFAULT_MS) -> ReadinessLevel:
    """Readiness band for a score on the [0, ms] scale.

    Bands are half-open on top except the highest, which includes ms.
    Scores outside the scale are a caller bug, not a clampable input.
    """
    if not 0.0 <= score <= ms:
        raise ScoreRangeError(f"score {score!r} outside [0, {ms}]")
    on_hundred = score * (100.0 / ms)
    for lower, _upper, level in READINESS_BANDS:
        if on_hundred >= lower:
            return level
    return ReadinessLevel.UNUSABLE


@dataclass(frozen=True, slots=True)
class SmoothingState:
    """Exponentially weighted moving average, carried as an immutable value.

    lam is the weight on the newest observation. The first observation
    initializes the average instead of mixing with a fabricated zero.
    """

    lam: float
    value: float | None = None


def smooth_step(state: SmoothingState, observation: float) -> SmoothingState:
    if not 0.0 < state.lam <= 1.0:
        raise ValueError(f"smoothing lambda must lie in (0, 1], got {state.lam!r}")
    if state.value is None:
        return SmoothingState(state.lam, float(observation))
    return SmoothingState(state.lam, state.lam * observation + (1.0 - state.lam) * state.value)


class ExponentialSmoother:
    """Mutable convenience wrapper around smooth_step for stream consumers."""

    def __init__(self, lam: float = 0.3):
        self._state = SmoothingState(lam)

    @property
    def value(self) -> float | None:
        return self._state.value

    def push(self, observation: float) -> float:
        self._state = smooth_step(self._state, observation)
        assert self._state.value is not None
        return self._state.value


class _RollingWindow:
    """Fixed-capacity criterion matrix with cheap min/max over live rows."""

    def __init__(self, capacity: int):
        self._buf = np.empty((capacity, len(SAMPLE_CRITERIA)), dtype=float)
        self._capacity = capacity
        self._count = 0
        self._next = 0

    def push(self, values: Sequence[float]) -> None:
        self._buf[self._next] = values
        self._next = (self._next + 1) % self._capacity
        if self._count < self._capacity:
            self._count += 1

    def min_max(self) -> tuple[np.ndarray, np.ndarray]:
        live = self._buf[: self._count]
        return live.min(axis=0), live.max(axis=0)


class ScoringSession:
    """Turns a sample stream into ScoreRecords, one at a time.

    Two bounds modes:

    * fixed: the caller supplies one bounds table up front (batch analysis,
      where the whole window is known).
    * rolling: bounds are re-derived per sample from the last `window`
      samples of the same scenario, including the new one. This is what the
      service does at ingestion, and replaying a log through a fresh session
      reproduces the stored scores bit for bit.

    Smoothing runs per (algorithm, scenario) series. A model with an
    estimate(features, confidence) method supplies the ml fields; without
    one they fall back to the analytic fusion value.
    """

    def __init__(
        self,
        triple: PresetTriple | None = None,
        profiles: Mapping[Algorithm, AlgorithmProfile] | None = None,
        ms: float = DEFAULT_MS,
        smoothing_lam: float = 0.3,
        window: int = 500,
        bounds: NormalizationBounds | None = None,
        model=None,
        interval_confidence: float = 0.9,
    ):
        if window < 1:
            raise ValueError(f"window must be at least 1, got {window}")
        self.triple = triple or default_triple()
        self.ms = float(ms)
        self.profiles = dict(profiles) if profiles is not None else dict(BUILTIN_PROFILES)
        self.model = model
        self.interval_confidence = interval_confidence
        self._fixed = bounds
        self._window = int(window)
        self._rolling: dict[Scenario, _RollingWindow] = {}
        self._smoothing_lam = smoothing_lam
        self._smoothers: dict[tuple[Algorithm, Scenario], SmoothingState] = {}

    def _profile(self, algorithm: Algorithm) -> AlgorithmProfile:
        try:
            return self.profiles[algorithm]
        except KeyError:
            raise ConfigError(f"no profile configured for algorithm {algorithm.value!r}") from None

    def _bounds_for(self, sample: MetricSample) -> NormalizationBounds:
        if self._fixed is not None:
            return self._fixed
        ring = self._rolling.get(sample.scenario)
        if ring is None:
            ring = self._rolling[sample.scenario] = _RollingWindow(self._window)
        raw = sample.criteria()
        ring.push([raw[c] for c in SAMPLE_CRITERIA])
        mins, maxs = ring.min_max()
        return bounds_from_arrays(mins, maxs, self.ms)

    def score(self, sample: MetricSample, record_id: int) -> ScoreRecord:
        bounds = self._bounds_for(sample)
        norms = normalize_sample(sample, bounds)
        profile = self._profile(sample.algorithm)

        basic = score_basic(norms, self.triple.basic, self.ms)
        tuned = score_tuned(norms, self.triple.tuned, self.ms)
        sec = build_security_vector(norms, profile, self.triple.fusion, self.ms)
        fusion = score_fusion(norms, sec, self.triple.fusion, self.ms)
        readiness = classify(fusion, self.ms)

        key = (sample.algorithm, sample.scenario)
        state = self._smoothers.get(key) or SmoothingState(self._smoothing_lam)
        state = smooth_step(state, fusion)
        self._smoothers[key] = state

        if self.model is not None:
            estimate, lo, hi = self.model.estimate(
                sample.criteria(), self.interval_confidence)
        else:
            estimate = lo = hi = fusion

        return ScoreRecord(
            record_id=record_id,
            sample=sample,
            basic=basic,
            tuned=tuned,
            fusion=fusion,
            readiness=readiness,
            smoothed_fusion=state.value if state.value is not None else fusion,
            ml_fusion=estimate,
            ml_lo=lo,
            ml_hi=hi,
            preset_name=self.triple.label,
        )


def score_pipeline(
    samples: Iterable[MetricSample],
    triple: PresetTriple | None = None,
    profiles: Mapping[Algorithm, AlgorithmProfile] | None = None,
    ms: float = DEFAULT_MS,
    smoothing_lam: float = 0.3,
    bounds_mode: str = "global",
    window: int = 500,
    model=None,
    start_id: int = 1,
) -> list[ScoreRecord]:
    """Score a whole dataset in order.

    bounds_mode "global" derives one bounds table from the full dataset;
    "rolling" replays the per-scenario ingestion windows of the given size.
    Record ids are sequential from start_id; they are positional, matching
    store ids only when the dataset is a full log replay.
    """
    items = list(samples)
    if not items:
        raise EmptyDatasetError("no samples to score")
    if bounds_mode == "global":
        session = ScoringSession(
            triple, profiles, ms, smoothing_lam, window,
            bounds=derive_bounds(items, ms), model=model)
    elif bounds_mode == "rolling":
        session = ScoringSession(
            triple, profiles, ms, smoothing_lam, window, model=model)
    else:
        raise ValueError(f"unknown bounds_mode {bounds_mode!r}")
    return [session.score(s, start_id + i) for i, s in enumerate(items)]
