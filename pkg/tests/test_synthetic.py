"""Synthetic generation: fitted statistics, envelopes, determinism."""

from __future__ import annotations

import statistics

import pytest

from qers.errors import EmptyDatasetError, InsufficientGroupDataError
from qers.model import Algorithm, SAMPLE_CRITERIA, Scenario, validate_sample
from qers.synthetic import fit_synthetic_spec, generate_synthetic

from conftest import fleet, make_sample


@pytest.fixture(scope="module")
def source():
    return fleet(devices=2, samples_per_device=100, seed=3)


@pytest.fixture(scope="module")
def spec(source):
    return fit_synthetic_spec(source)


class TestFitSpec:
    def test_group_stats_match_hand_computation(self):
        samples = [make_sample(latency_ms=v, ts_ms=1_700_000_000_000 + i)
                   for i, v in enumerate([10.0, 20.0, 60.0])]
        spec = fit_synthetic_spec(samples)
        stats = spec.groups[(Algorithm.KYBER, Scenario.NEAR)]["latency_ms"]
        assert stats.mean == pytest.approx(statistics.mean([10, 20, 60]))
        assert stats.std == pytest.approx(statistics.pstdev([10, 20, 60]))
        assert (stats.lo, stats.hi) == (10.0, 60.0)
        assert spec.group_sizes[(Algorithm.KYBER, Scenario.NEAR)] == 3

    def test_all_groups_characterized(self, source, spec):
        observed = {(s.algorithm, s.scenario) for s in source}
        assert set(spec.groups) == observed
        for stats in spec.groups.values():
            assert set(stats) == set(SAMPLE_CRITERIA)

    def test_thin_group_rejected(self):
        samples = [make_sample(),
                   make_sample(ts_ms=1_700_000_000_001),
                   make_sample(algorithm=Algorithm.NTRU, ts_ms=1_700_000_000_002)]
        with pytest.raises(InsufficientGroupDataError, match="ntru"):
            fit_synthetic_spec(samples)

    def test_empty_rejected(self):
        with pytest.raises(EmptyDatasetError):
            fit_synthetic_spec([])

    def test_ordered_keys_stable(self, spec):
        keys = spec.ordered_keys()
        assert keys == sorted(keys, key=lambda k: (k[0].value, k[1].value))


class TestGenerate:
    def test_deterministic(self, spec):
        assert generate_synthetic(spec, 50, seed=9) == generate_synthetic(
            spec, 50, seed=9)

    def test_seed_changes_draws(self, spec):
        assert generate_synthetic(spec, 50, seed=1) != generate_synthetic(
            spec, 50, seed=2)

    def test_round_robin_group_sizes(self, spec):
        n_groups = len(spec.ordered_keys())
        out = generate_synthetic(spec, n_groups * 7)
        counts: dict = {}
        for s in out:
            counts[(s.algorithm, s.scenario)] = counts.get(
                (s.algorithm, s.scenario), 0) + 1
        assert set(counts.values()) == {7}

    def test_values_stay_inside_group_envelope(self, spec):
        for s in generate_synthetic(spec, 400, seed=5):
            stats = spec.groups[(s.algorithm, s.scenario)]
            raw = s.criteria()
            for criterion in SAMPLE_CRITERIA:
                if criterion == "key_bytes":
                    # integer rounding may step half a byte past the envelope
                    assert stats[criterion].lo - 0.5 <= raw[criterion] <= \
                        stats[criterion].hi + 0.5
                else:
                    assert stats[criterion].lo <= raw[criterion] <= stats[criterion].hi

    def test_all_outputs_validate(self, spec):
        for s in generate_synthetic(spec, 200, seed=11):
            validate_sample(s)

    def test_group_means_converge_to_spec(self, spec):
        keys = spec.ordered_keys()
        out = generate_synthetic(spec, len(keys) * 1500, seed=2)
        by_group: dict = {}
        for s in out:
            by_group.setdefault((s.algorithm, s.scenario), []).append(s)
        for key, members in by_group.items():
            n = len(members)
            for criterion in ("latency_ms", "cpu_pct", "rssi_dbm"):
                target = spec.groups[key][criterion]
                got = statistics.mean(m.criteria()[criterion] for m in members)
                # 4 standard errors plus slack for envelope clipping bias
                tolerance = 4.0 * target.std / n ** 0.5 + 0.02 * max(
                    1.0, abs(target.mean))
                assert abs(got - target.mean) <= tolerance, (key, criterion)

    def test_zero_n_is_empty(self, spec):
        assert generate_synthetic(spec, 0) == []

    def test_negative_n_rejected(self, spec):
        with pytest.raises(ValueError, match="non-negative"):
            generate_synthetic(spec, -1)

    def test_device_ids_name_the_group(self, spec):
        out = generate_synthetic(spec, 20)
        for s in out:
            assert s.device_id == f"synth-{s.algorithm.value}-{s.scenario.value}"

    def test_timestamps_advance_within_group(self, spec):
        out = generate_synthetic(spec, 60, interval_ms=50)
        per_group: dict = {}
        for s in out:
            per_group.setdefault((s.algorithm, s.scenario), []).append(s.ts_ms)
        for ts_list in per_group.values():
            assert ts_list == sorted(ts_list)
            assert all(b - a == 50 for a, b in zip(ts_list, ts_list[1:]))
