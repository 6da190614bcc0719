"""Aggregate views over scored records: score tables, heatmap, distributions.

These functions produce JSON-ready dicts (enums flattened to strings) so the
HTTP layer and the CLI report command can share them verbatim. The heatmap
is a recomputation view: it normalizes the given samples against their own
window bounds, so the same samples produce the same heatmap whether they
came from the service or a CSV file.
"""

from __future__ import annotations

from statistics import mean, median
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import EmptyDatasetError
from .model import (
    Algorithm,
    AlgorithmProfile,
    MetricSample,
    PresetTriple,
    SAMPLE_CRITERIA,
    Scenario,
    ScoreRecord,
)
from .normalization import DEFAULT_MS, derive_bounds, normalize_sample
from .scoring import classify, score_pipeline


def _group_key(record: ScoreRecord) -> tuple[str, str]:
    return (record.sample.algorithm.value, record.sample.scenario.value)


def aggregate_rows(records: Sequence[ScoreRecord], ms: float = DEFAULT_MS) -> list[dict]:
    """Per (algorithm, scenario) summary of stored scores.

    Readiness is classified from the mean fusion score, which is the
    headline number a deployment decision looks at.
    """
    grouped: dict[tuple[str, str], list[ScoreRecord]] = {}
    for record in records:
        grouped.setdefault(_group_key(record), []).append(record)
    rows = []
    for (algorithm, scenario) in sorted(grouped):
        members = grouped[(algorithm, scenario)]
        fusion_mean = mean(r.fusion for r in members)
        rows.append({
            "algorithm": algorithm,
            "scenario": scenario,
            "count": len(members),
            "basic_mean": mean(r.basic for r in members),
            "basic_median": median(r.basic for r in members),
            "tuned_mean": mean(r.tuned for r in members),
            "tuned_median": median(r.tuned for r in members),
            "fusion_mean": fusion_mean,
            "fusion_median": median(r.fusion for r in members),
            "readiness": classify(fusion_mean, ms).value,
            "ml_mean": mean(r.ml_fusion for r in members),
            "ml_lo_mean": mean(r.ml_lo for r in members),
            "ml_hi_mean": mean(r.ml_hi for r in members),
            "smoothed_last": members[-1].smoothed_fusion,
        })
    return rows


def heatmap_view(
    samples: Sequence[MetricSample],
    triple: PresetTriple | None = None,
    profiles: Mapping[Algorithm, AlgorithmProfile] | None = None,
    ms: float = DEFAULT_MS,
) -> dict:
    """Algorithms x criteria matrix of mean normalized values plus mean scores."""
    if not samples:
        raise EmptyDatasetError("no samples for heatmap")
    bounds = derive_bounds(samples, ms)
    records = score_pipeline(samples, triple=triple, profiles=profiles, ms=ms,
                             bounds_mode="global")
    norm_sums: dict[str, np.ndarray] = {}
    scores: dict[str, list[ScoreRecord]] = {}
    counts: dict[str, int] = {}
    for sample, record in zip(samples, records):
        algorithm = sample.algorithm.value
        normalized = normalize_sample(sample, bounds)
        vector = np.array([normalized[c] for c in SAMPLE_CRITERIA])
        if algorithm in norm_sums:
            norm_sums[algorithm] += vector
            counts[algorithm] += 1
            scores[algorithm].append(record)
        else:
            norm_sums[algorithm] = vector
            counts[algorithm] = 1
            scores[algorithm] = [record]
    rows = []
    for algorithm in sorted(norm_sums):
        means = norm_sums[algorithm] / counts[algorithm]
        group = scores[algorithm]
        rows.append({
            "algorithm": algorithm,
            "count": counts[algorithm],
            "normalized_means": {
                c: float(means[i]) for i, c in enumerate(SAMPLE_CRITERIA)},
            "qers_basic": mean(r.basic for r in group),
            "qers_tuned": mean(r.tuned for r in group),
            "qers_fusion": mean(r.fusion for r in group),
        })
    return {"criteria": list(SAMPLE_CRITERIA), "rows": rows, "ms": ms}


_VARIANTS = ("basic", "tuned", "fusion")


def distribution_view(records: Sequence[ScoreRecord]) -> dict:
    """Five-number summaries per algorithm for each score variant."""
    if not records:
        raise EmptyDatasetError("no records for distribution")
    grouped: dict[str, list[ScoreRecord]] = {}
    for record in records:
        grouped.setdefault(record.sample.algorithm.value, []).append(record)
    rows = []
    for algorithm in sorted(grouped):
        members = grouped[algorithm]
        for variant in _VARIANTS:
            values = np.array([getattr(r, variant) for r in members])
            lo, q1, med, q3, hi = np.percentile(values, [0, 25, 50, 75, 100])
            rows.append({
                "algorithm": algorithm,
                "variant": variant,
                "count": len(members),
                "min": float(lo),
                "q1": float(q1),
                "median": float(med),
                "q3": float(q3),
                "max": float(hi),
            })
    return {"rows": rows}


def scatter_view(records: Sequence[ScoreRecord]) -> dict:
    """Median (latency, fusion) point per algorithm and scenario."""
    if not records:
        raise EmptyDatasetError("no records for scatter")
    grouped: dict[tuple[str, str], list[ScoreRecord]] = {}
    for record in records:
        grouped.setdefault(_group_key(record), []).append(record)
    rows = []
    for (algorithm, scenario) in sorted(grouped):
        members = grouped[(algorithm, scenario)]
        rows.append({
            "algorithm": algorithm,
            "scenario": scenario,
            "count": len(members),
            "latency_ms_median": median(r.sample.latency_ms for r in members),
            "fusion_median": median(r.fusion for r in members),
        })
    return {"rows": rows}


def filter_records(
    records: Iterable[ScoreRecord],
    algorithm: Algorithm | None = None,
    scenario: Scenario | None = None,
    window: int | None = None,
) -> list[ScoreRecord]:
    """Filter by algorithm/scenario, then keep the last `window` records."""
    kept = [
        r for r in records
        if (algorithm is None or r.sample.algorithm is algorithm)
        and (scenario is None or r.sample.scenario is scenario)
    ]
    if window is not None and window >= 0:
        kept = kept[len(kept) - window:] if window else []
    return kept
