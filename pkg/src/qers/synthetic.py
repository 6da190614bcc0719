"""Synthetic telemetry drawn from the per-group statistics of observed data.

fit_synthetic_spec characterizes each (algorithm, scenario) group by the
mean, spread and observed envelope of every criterion. generate_synthetic
then draws normal values from those statistics, clipped to the envelope so
no generated value escapes the range the originals covered. Useful for
growing training sets beyond what a testbed produced without inventing
behavior the testbed never showed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import EmptyDatasetError, InsufficientGroupDataError
from .model import Algorithm, MetricSample, SAMPLE_CRITERIA, Scenario

GroupKey = tuple[Algorithm, Scenario]


@dataclass(frozen=True, slots=True)
class CriterionStats:
    mean: float
    std: float
    lo: float
    hi: float


@dataclass(frozen=True, slots=True)
class SyntheticSpec:
    """Per-group, per-criterion statistics of a dataset."""

    groups: Mapping[GroupKey, Mapping[str, CriterionStats]]
    group_sizes: Mapping[GroupKey, int]

    def ordered_keys(self) -> list[GroupKey]:
        return sorted(self.groups, key=lambda k: (k[0].value, k[1].value))


def fit_synthetic_spec(
    samples: Iterable[MetricSample], min_group_size: int = 2,
) -> SyntheticSpec:
    """Measure group statistics. Population std (ddof 0).

    Groups with fewer than min_group_size rows cannot be characterized;
    that is an error rather than a silent skip so callers notice thin data.
    """
    grouped: dict[GroupKey, list[MetricSample]] = {}
    for sample in samples:
        grouped.setdefault((sample.algorithm, sample.scenario), []).append(sample)
    if not grouped:
        raise EmptyDatasetError("no samples to characterize")
    groups: dict[GroupKey, dict[str, CriterionStats]] = {}
    sizes: dict[GroupKey, int] = {}
    for key, members in grouped.items():
        if len(members) < min_group_size:
            raise InsufficientGroupDataError(
                f"group ({key[0].value}, {key[1].value}) has {len(members)} "
                f"samples, need at least {min_group_size}")
        columns = {c: np.array([m.criteria()[c] for m in members]) for c in SAMPLE_CRITERIA}
        groups[key] = {
            c: CriterionStats(
                float(col.mean()), float(col.std()), float(col.min()), float(col.max()))
            for c, col in columns.items()
        }
        sizes[key] = len(members)
    return SyntheticSpec(groups, sizes)


def _clip_to_valid(criterion: str, value: float) -> float:
    if criterion in ("latency_ms", "jitter_ms", "overhead_ms", "energy_mj"):
        return max(0.0, value)
    if criterion in ("packet_loss_pct", "cpu_pct"):
        return min(100.0, max(0.0, value))
    return value


def generate_synthetic(
    spec: SyntheticSpec,
    n: int,
    seed: int = 0,
    start_ts_ms: int = 1_700_000_000_000,
    interval_ms: int = 50,
) -> list[MetricSample]:
    """Draw n samples cycling round-robin over the spec's groups.

    Deterministic for a given (spec, n, seed). Values are normal draws
    clipped to the group envelope, then to field validity; key sizes round
    to integers of at least one byte.
    """
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    keys = spec.ordered_keys()
    rng = np.random.default_rng(seed)
    out: list[MetricSample] = []
    per_device_count: dict[GroupKey, int] = {k: 0 for k in keys}
    for i in range(n):
        key = keys[i % len(keys)]
        algorithm, scenario = key
        stats = spec.groups[key]
        values: dict[str, float] = {}
        for criterion in SAMPLE_CRITERIA:
            st = stats[criterion]
            drawn = float(rng.normal(st.mean, st.std))
            drawn = min(st.hi, max(st.lo, drawn))
            values[criterion] = _clip_to_valid(criterion, drawn)
        tick = per_device_count[key]
        per_device_count[key] = tick + 1
        out.append(MetricSample(
            ts_ms=start_ts_ms + tick * interval_ms,
            device_id=f"synth-{algorithm.value}-{scenario.value}",
            algorithm=algorithm,
            scenario=scenario,
            latency_ms=values["latency_ms"],
            jitter_ms=values["jitter_ms"],
            packet_loss_pct=values["packet_loss_pct"],
            overhead_ms=values["overhead_ms"],
            cpu_pct=values["cpu_pct"],
            rssi_dbm=values["rssi_dbm"],
            energy_mj=values["energy_mj"],
            key_bytes=max(1, int(round(values["key_bytes"]))),
        ))
    return out
