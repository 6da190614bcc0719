"""CSV wire format and the append-only sample log."""

from __future__ import annotations

import io
import threading

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qers.errors import CsvParseError, SampleValidationError, UnknownHeaderError
from qers.model import Algorithm, MetricSample, Scenario
from qers.scoring import score_pipeline
from qers.store import (
    SCORE_HEADER,
    SampleLog,
    WIRE_HEADER,
    export_csv,
    export_csv_path,
    export_scores_csv,
    import_csv,
    import_csv_path,
    import_scores_csv,
    sample_to_row,
    samples_to_csv_text,
)

from conftest import make_sample

WIRE = ("ts_ms,device_id,algorithm,scenario,latency_ms,jitter_ms,"
        "packet_loss_pct,overhead_ms,cpu_pct,rssi_dbm,energy_mj,key_bytes")


class TestWireFormat:
    def test_header_is_frozen(self):
        assert WIRE_HEADER == WIRE

    def test_score_header_extends_wire(self):
        assert SCORE_HEADER == WIRE + (",qers_basic,qers_tuned,qers_fusion,"
                                       "readiness,smoothed_fusion,ml_fusion,"
                                       "ml_lo,ml_hi,preset")

    def test_row_round_trips_awkward_floats(self):
        s = make_sample(latency_ms=0.1, jitter_ms=1e-17,
                        packet_loss_pct=2.0000000000000004,
                        overhead_ms=1234567.875, rssi_dbm=-0.0)
        text = samples_to_csv_text([s])
        assert import_csv(io.StringIO(text)) == [s]

    def test_row_field_order(self, sample):
        row = sample_to_row(sample)
        assert row[0] == "1700000000000"
        assert row[1] == "dev-00"
        assert row[2] == "kyber"
        assert row[3] == "near"
        assert row[-1] == "1000"

    def test_export_reports_row_count(self):
        buf = io.StringIO()
        n = export_csv([make_sample(), make_sample(ts_ms=1_700_000_000_001)], buf)
        assert n == 2
        assert buf.getvalue().count("\n") == 3

    def test_quoting_survives_awkward_device_ids(self):
        s = make_sample(device_id='rack "A", bay 2')
        assert import_csv(io.StringIO(samples_to_csv_text([s]))) == [s]

    def test_path_helpers(self, tmp_path):
        path = str(tmp_path / "wire.csv")
        samples = [make_sample(), make_sample(ts_ms=1_700_000_000_005)]
        assert export_csv_path(samples, path) == 2
        assert import_csv_path(path) == samples


valid_floats = st.floats(min_value=0.0, max_value=1e6,
                         allow_nan=False, allow_infinity=False)


@st.composite
def wire_samples(draw):
    return make_sample(
        ts_ms=draw(st.integers(min_value=1, max_value=2**53)),
        device_id=draw(st.text(
            alphabet=st.characters(blacklist_categories=("Cs", "Cc")),
            min_size=1, max_size=24)),
        algorithm=draw(st.sampled_from(list(Algorithm))),
        scenario=draw(st.sampled_from(list(Scenario))),
        latency_ms=draw(valid_floats),
        jitter_ms=draw(valid_floats),
        packet_loss_pct=draw(st.floats(min_value=0.0, max_value=100.0)),
        overhead_ms=draw(valid_floats),
        cpu_pct=draw(st.floats(min_value=0.0, max_value=100.0)),
        rssi_dbm=draw(st.floats(min_value=-150.0, max_value=0.0,
                                allow_nan=False)),
        energy_mj=draw(valid_floats),
        key_bytes=draw(st.integers(min_value=1, max_value=10**9)),
    )


class TestRoundTripProperty:
    @given(samples=st.lists(wire_samples(), max_size=20))
    @settings(max_examples=150)
    def test_export_import_identity(self, samples):
        assert import_csv(io.StringIO(samples_to_csv_text(samples))) == samples


class TestImportErrors:
    def test_empty_input(self):
        with pytest.raises(UnknownHeaderError, match="empty"):
            import_csv(io.StringIO(""))

    def test_wrong_header(self):
        with pytest.raises(UnknownHeaderError, match="expected"):
            import_csv(io.StringIO("a,b,c\n"))

    def test_bad_row_names_line(self):
        text = samples_to_csv_text([make_sample(), make_sample()])
        broken = text.replace("kyber", "caesar", 1)
        with pytest.raises(CsvParseError, match="line 2.*caesar"):
            import_csv(io.StringIO(broken))

    def test_second_bad_row_names_line_three(self):
        lines = samples_to_csv_text([make_sample(), make_sample()]).splitlines()
        lines[2] = lines[2].replace("near", "orbit")
        with pytest.raises(CsvParseError, match="line 3"):
            import_csv(io.StringIO("\n".join(lines) + "\n"))

    def test_short_row(self):
        with pytest.raises(CsvParseError, match="expected 12 fields"):
            import_csv(io.StringIO(WIRE + "\n1,dev,kyber\n"))

    def test_non_numeric_field_named(self):
        text = samples_to_csv_text([make_sample()])
        broken = text.replace("50.0", "fast", 1)
        with pytest.raises(CsvParseError, match="latency_ms"):
            import_csv(io.StringIO(broken))


class TestScoreCsv:
    @pytest.fixture()
    def records(self):
        samples = [
            make_sample(ts_ms=1_700_000_000_000 + i * 100,
                        latency_ms=30.0 + 7.0 * i,
                        algorithm=list(Algorithm)[i % 5])
            for i in range(12)
        ]
        return score_pipeline(samples)

    def test_round_trip(self, records):
        buf = io.StringIO()
        assert export_scores_csv(records, buf) == len(records)
        buf.seek(0)
        assert import_scores_csv(buf) == records

    def test_preset_label_safe_in_csv(self, records):
        buf = io.StringIO()
        export_scores_csv(records, buf)
        line = buf.getvalue().splitlines()[1]
        assert line.endswith("Basic-B+Tuned-B+Fusion-default")

    def test_bad_readiness_rejected(self, records):
        buf = io.StringIO()
        export_scores_csv(records[:1], buf)
        broken = buf.getvalue().replace("Moderate", "Mediocre")
        with pytest.raises(CsvParseError, match="readiness"):
            import_scores_csv(io.StringIO(broken))


class TestSampleLogBasics:
    def test_ids_are_append_positions(self):
        log = SampleLog()
        ids = [log.append(make_sample(ts_ms=1_700_000_000_000 + i))
               for i in range(3)]
        assert ids == [1, 2, 3]
        assert len(log) == 3
        assert log.get(2).ts_ms == 1_700_000_000_001

    def test_get_unknown_id(self):
        log = SampleLog()
        with pytest.raises(KeyError):
            log.get(1)

    def test_invalid_sample_rejected_and_not_stored(self):
        log = SampleLog()
        with pytest.raises(SampleValidationError, match="cpu_pct"):
            log.append(make_sample(cpu_pct=300.0))
        assert len(log) == 0

    def test_device_time_must_not_rewind(self):
        log = SampleLog()
        log.append(make_sample(ts_ms=2_000))
        with pytest.raises(SampleValidationError, match="non-decreasing"):
            log.append(make_sample(ts_ms=1_999))
        # same timestamp is allowed, and other devices are unaffected
        log.append(make_sample(ts_ms=2_000))
        log.append(make_sample(ts_ms=10, device_id="dev-99"))
        assert len(log) == 3

    def test_append_many_stops_at_first_bad(self):
        log = SampleLog()
        batch = [make_sample(ts_ms=2_000),
                 make_sample(ts_ms=1_000),  # rewinds
                 make_sample(ts_ms=3_000)]
        with pytest.raises(SampleValidationError):
            log.append_many(batch)
        assert len(log) == 1

    def test_snapshot_is_isolated(self):
        log = SampleLog()
        log.append(make_sample())
        snap = log.snapshot()
        snap.clear()
        assert len(log) == 1


class TestSampleLogPersistence:
    def test_reopen_restores_state(self, tmp_path):
        path = str(tmp_path / "log.csv")
        samples = [make_sample(ts_ms=1_700_000_000_000 + i) for i in range(4)]
        with SampleLog(path) as log:
            log.append_many(samples)
        with SampleLog(path) as log:
            assert log.snapshot() == samples
            assert log.append(make_sample(ts_ms=1_700_000_000_010)) == 5

    def test_file_is_flushed_per_append(self, tmp_path):
        path = str(tmp_path / "log.csv")
        with SampleLog(path) as log:
            log.append(make_sample())
            with open(path) as fh:
                assert len(fh.read().splitlines()) == 2

    def test_corrupt_row_detected_on_open(self, tmp_path):
        path = tmp_path / "log.csv"
        path.write_text(WIRE + "\n1,dev,kyber,near,oops,1,1,1,1,-50,1,10\n")
        with pytest.raises(CsvParseError, match="latency_ms"):
            SampleLog(str(path))

    def test_invalid_stored_sample_detected_on_open(self, tmp_path):
        path = tmp_path / "log.csv"
        bad = make_sample(cpu_pct=30.0)
        text = samples_to_csv_text([bad]).replace("30.0", "999.0")
        path.write_text(text)
        with pytest.raises(CsvParseError, match="cpu_pct"):
            SampleLog(str(path))

    def test_foreign_header_rejected(self, tmp_path):
        path = tmp_path / "log.csv"
        path.write_text("time,value\n1,2\n")
        with pytest.raises(UnknownHeaderError):
            SampleLog(str(path))


def _random_log(n: int, seed: int) -> tuple[SampleLog, list[MetricSample]]:
    import numpy as np

    rng = np.random.default_rng(seed)
    log = SampleLog()
    samples = []
    ts = 1_700_000_000_000
    algorithms = list(Algorithm)
    for i in range(n):
        ts += int(rng.integers(0, 3))  # duplicates exercise bisect edges
        s = make_sample(
            ts_ms=ts,
            device_id=f"dev-{int(rng.integers(0, 5)):02d}",
            algorithm=algorithms[int(rng.integers(0, 5))],
            scenario=Scenario.NEAR if rng.integers(0, 2) else Scenario.FAR,
            latency_ms=float(rng.uniform(5, 200)),
        )
        samples.append(s)
        log.append(s)
    return log, samples


@pytest.fixture(scope="module")
def data():
    return _random_log(2_000, seed=13)


class TestQuery:
    @staticmethod
    def scan(samples, algorithm=None, scenario=None, since=None, until=None,
             last=None):
        hits = [
            (i + 1, s) for i, s in enumerate(samples)
            if (algorithm is None or s.algorithm is algorithm)
            and (scenario is None or s.scenario is scenario)
            and (since is None or s.ts_ms >= since)
            and (until is None or s.ts_ms <= until)
        ]
        hits.sort(key=lambda pair: (pair[1].ts_ms, pair[0]))
        return hits if last is None else hits[len(hits) - min(last, len(hits)):]

    def test_unfiltered_matches_scan(self, data):
        log, samples = data
        assert log.query() == self.scan(samples)

    @pytest.mark.parametrize("algorithm", list(Algorithm))
    def test_algorithm_filter(self, data, algorithm):
        log, samples = data
        assert log.query(algorithm=algorithm) == self.scan(
            samples, algorithm=algorithm)

    def test_scenario_filter(self, data):
        log, samples = data
        assert log.query(scenario=Scenario.FAR) == self.scan(
            samples, scenario=Scenario.FAR)

    def test_combined_filters_with_time_range(self, data):
        log, samples = data
        since = samples[200].ts_ms
        until = samples[1500].ts_ms
        got = log.query(algorithm=Algorithm.FALCON, scenario=Scenario.NEAR,
                        since_ms=since, until_ms=until)
        assert got == self.scan(samples, Algorithm.FALCON, Scenario.NEAR,
                                since, until)

    def test_time_bounds_inclusive(self, data):
        log, samples = data
        ts = samples[700].ts_ms
        got = log.query(since_ms=ts, until_ms=ts)
        assert got == self.scan(samples, since=ts, until=ts)
        assert got  # duplicates guarantee at least the probe sample

    def test_last_k(self, data):
        log, samples = data
        assert log.query(last=17) == self.scan(samples, last=17)
        assert log.query(last=0) == []
        assert log.query(last=5_000) == self.scan(samples)

    def test_query_on_empty_log(self):
        assert SampleLog().query(algorithm=Algorithm.KYBER) == []


class TestConcurrency:
    def test_parallel_appends_serialize(self, tmp_path):
        path = str(tmp_path / "log.csv")
        log = SampleLog(path)
        errors = []

        def worker(device: int):
            try:
                for i in range(250):
                    log.append(make_sample(
                        ts_ms=1_700_000_000_000 + i,
                        device_id=f"dev-{device:02d}"))
            except Exception as exc:  # noqa: BLE001
                errors.append(exc)

        threads = [threading.Thread(target=worker, args=(d,)) for d in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        log.close()
        assert not errors
        assert len(log) == 1_000
        with open(path) as fh:
            assert len(fh.read().splitlines()) == 1_001
        reopened = SampleLog(path)
        assert len(reopened) == 1_000
        reopened.close()
