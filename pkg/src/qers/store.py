"""Append-only sample log and the CSV wire format.

The log file is plain CSV with a fixed header; every accepted sample is one
appended row, flushed immediately. Nothing is ever rewritten in place, so a
crash can at worst lose the final row, never corrupt earlier ones. On open
the whole file is replayed into memory and indexed by (algorithm, scenario)
with per-key timestamp ordering, which keeps range queries cheap without a
second on-disk structure.

Floats are written with repr, whose shortest-round-trip form guarantees
import(export(x)) == x exactly.

Writers must serialize externally or via the log's own lock: the file is
single-writer. Readers get snapshot copies and can run concurrently.
"""

from __future__ import annotations

import csv
import io
import threading
from bisect import bisect_left, bisect_right, insort
from typing import Iterable, Sequence, TextIO

from .errors import CsvParseError, SampleValidationError, UnknownHeaderError
from .model import (
    Algorithm,
    MetricSample,
    ReadinessLevel,
    Scenario,
    ScoreRecord,
    validate_sample,
)

WIRE_FIELDS: tuple[str, ...] = (
    "ts_ms",
    "device_id",
    "algorithm",
    "scenario",
    "latency_ms",
    "jitter_ms",
    "packet_loss_pct",
    "overhead_ms",
    "cpu_pct",
    "rssi_dbm",
    "energy_mj",
    "key_bytes",
)
WIRE_HEADER = ",".join(WIRE_FIELDS)

SCORE_FIELDS: tuple[str, ...] = WIRE_FIELDS + (
    "qers_basic",
    "qers_tuned",
    "qers_fusion",
    "readiness",
    "smoothed_fusion",
    "ml_fusion",
    "ml_lo",
    "ml_hi",
    "preset",
)
SCORE_HEADER = ",".join(SCORE_FIELDS)

_FLOAT_FIELDS = (
    "latency_ms", "jitter_ms", "packet_loss_pct", "overhead_ms",
    "cpu_pct", "rssi_dbm", "energy_mj",
)


def sample_to_row(sample: MetricSample) -> list[str]:
    return [
        str(sample.ts_ms),
        sample.device_id,
        sample.algorithm.value,
        sample.scenario.value,
        repr(float(sample.latency_ms)),
        repr(float(sample.jitter_ms)),
        repr(float(sample.packet_loss_pct)),
        repr(float(sample.overhead_ms)),
        repr(float(sample.cpu_pct)),
        repr(float(sample.rssi_dbm)),
        repr(float(sample.energy_mj)),
        str(sample.key_bytes),
    ]


def row_to_sample(fields: Sequence[str], line: int) -> MetricSample:
    """Parse one data row. Raises CsvParseError naming the bad field."""
    if len(fields) != len(WIRE_FIELDS):
        raise CsvParseError(
            line, f"expected {len(WIRE_FIELDS)} fields, got {len(fields)}")
    values = dict(zip(WIRE_FIELDS, fields))

    def _int(name: str) -> int:
        try:
            return int(values[name])
        except ValueError:
            raise CsvParseError(line, f"non-integer {name}: {values[name]!r}") from None

    def _float(name: str) -> float:
        try:
            return float(values[name])
        except ValueError:
            raise CsvParseError(line, f"non-numeric {name}: {values[name]!r}") from None

    try:
        algorithm = Algorithm(values["algorithm"])
    except ValueError:
        raise CsvParseError(
            line, f"unknown algorithm: {values['algorithm']!r}") from None
    try:
        scenario = Scenario(values["scenario"])
    except ValueError:
        raise CsvParseError(line, f"unknown scenario: {values['scenario']!r}") from None

    return MetricSample(
        ts_ms=_int("ts_ms"),
        device_id=values["device_id"],
        algorithm=algorithm,
        scenario=scenario,
        latency_ms=_float("latency_ms"),
        jitter_ms=_float("jitter_ms"),
        packet_loss_pct=_float("packet_loss_pct"),
        overhead_ms=_float("overhead_ms"),
        cpu_pct=_float("cpu_pct"),
        rssi_dbm=_float("rssi_dbm"),
        energy_mj=_float("energy_mj"),
        key_bytes=_int("key_bytes"),
    )


def _check_header(fields: Sequence[str], expected: Sequence[str]) -> None:
    if list(fields) != list(expected):
        raise UnknownHeaderError(
            f"unexpected header {','.join(fields)!r}, expected {','.join(expected)!r}")


def export_csv(samples: Iterable[MetricSample], out: TextIO) -> int:
    """Write the wire format. Returns the number of rows written."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(WIRE_FIELDS)
    count = 0
    for sample in samples:
        writer.writerow(sample_to_row(sample))
        count += 1
    return count


def import_csv(source: TextIO) -> list[MetricSample]:
    """Read the wire format. Parses only; range validation happens on append."""
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise UnknownHeaderError("empty input, expected a header row") from None
    _check_header(header, WIRE_FIELDS)
    return [row_to_sample(row, reader.line_num) for row in reader if row]


def export_csv_path(samples: Iterable[MetricSample], path: str) -> int:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        return export_csv(samples, fh)


def import_csv_path(path: str) -> list[MetricSample]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return import_csv(fh)


def samples_to_csv_text(samples: Iterable[MetricSample]) -> str:
    buf = io.StringIO()
    export_csv(samples, buf)
    return buf.getvalue()


def record_to_row(record: ScoreRecord) -> list[str]:
    return sample_to_row(record.sample) + [
        repr(float(record.basic)),
        repr(float(record.tuned)),
        repr(float(record.fusion)),
        record.readiness.value,
        repr(float(record.smoothed_fusion)),
        repr(float(record.ml_fusion)),
        repr(float(record.ml_lo)),
        repr(float(record.ml_hi)),
        record.preset_name,
    ]


def export_scores_csv(records: Iterable[ScoreRecord], out: TextIO) -> int:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(SCORE_FIELDS)
    count = 0
    for record in records:
        writer.writerow(record_to_row(record))
        count += 1
    return count


def import_scores_csv(source: TextIO) -> list[ScoreRecord]:
    """Read a score export. Record ids are positional (1-based)."""
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise UnknownHeaderError("empty input, expected a header row") from None
    _check_header(header, SCORE_FIELDS)
    records = []
    for row in reader:
        if not row:
            continue
        line = reader.line_num
        if len(row) != len(SCORE_FIELDS):
            raise CsvParseError(
                line, f"expected {len(SCORE_FIELDS)} fields, got {len(row)}")
        sample = row_to_sample(row[: len(WIRE_FIELDS)], line)
        extra = row[len(WIRE_FIELDS):]
        try:
            readiness = ReadinessLevel(extra[3])
        except ValueError:
            raise CsvParseError(line, f"unknown readiness: {extra[3]!r}") from None
        try:
            records.append(ScoreRecord(
                record_id=len(records) + 1,
                sample=sample,
                basic=float(extra[0]),
                tuned=float(extra[1]),
                fusion=float(extra[2]),
                readiness=readiness,
                smoothed_fusion=float(extra[4]),
                ml_fusion=float(extra[5]),
                ml_lo=float(extra[6]),
                ml_hi=float(extra[7]),
                preset_name=extra[8],
            ))
        except ValueError as exc:
            raise CsvParseError(line, f"bad score field: {exc}") from None
    return records


class SampleLog:
    """Durable append-only log of validated samples with an in-memory index.

    Record ids are 1-based append positions and never change. Timestamps
    within one device's stream must be non-decreasing; cross-device order
    is unconstrained. Queries return samples sorted by (ts_ms, id).
    """

    def __init__(self, path: str | None = None):
        self._path = path
        self._lock = threading.RLock()
        self._samples: list[MetricSample] = []
        self._by_key: dict[tuple[Algorithm, Scenario], list[tuple[int, int]]] = {}
        self._ordered: list[tuple[int, int]] = []  # (ts_ms, id), kept sorted
        self._device_last_ts: dict[str, int] = {}
        self._fh: TextIO | None = None
        if path is not None:
            self._open_file(path)

    def _open_file(self, path: str) -> None:
        try:
            with open(path, "r", encoding="utf-8", newline="") as fh:
                existing = fh.read()
        except FileNotFoundError:
            existing = ""
        if existing.strip():
            reader = csv.reader(io.StringIO(existing))
            header = next(reader)
            _check_header(header, WIRE_FIELDS)
            for row in reader:
                if not row:
                    continue
                sample = row_to_sample(row, reader.line_num)
                try:
                    self._index(validate_sample(sample))
                except SampleValidationError as exc:
                    raise CsvParseError(reader.line_num, str(exc)) from exc
        self._fh = open(path, "a", encoding="utf-8", newline="")
        if not existing.strip():
            self._fh.write(WIRE_HEADER + "\n")
            self._fh.flush()

    def _index(self, sample: MetricSample) -> int:
        """Caller holds the lock (or is the constructor)."""
        record_id = len(self._samples) + 1
        last = self._device_last_ts.get(sample.device_id)
        if last is not None and sample.ts_ms < last:
            raise SampleValidationError(
                "ts_ms",
                f"device {sample.device_id!r} stream must be non-decreasing "
                f"({sample.ts_ms} after {last})")
        self._samples.append(sample)
        self._device_last_ts[sample.device_id] = sample.ts_ms
        entry = (sample.ts_ms, record_id)
        insort(self._ordered, entry)
        insort(self._by_key.setdefault((sample.algorithm, sample.scenario), []), entry)
        return record_id

    def append(self, sample: MetricSample) -> int:
        """Validate, persist and index one sample. Returns its record id."""
        with self._lock:
            validate_sample(sample)
            record_id = self._index(sample)
            if self._fh is not None:
                csv.writer(self._fh, lineterminator="\n").writerow(sample_to_row(sample))
                self._fh.flush()
            return record_id

    def append_many(self, samples: Iterable[MetricSample]) -> list[int]:
        """Append a batch, flushing once. Stops at the first bad sample."""
        ids = []
        with self._lock:
            writer = csv.writer(self._fh, lineterminator="\n") if self._fh else None
            try:
                for sample in samples:
                    validate_sample(sample)
                    ids.append(self._index(sample))
                    if writer is not None:
                        writer.writerow(sample_to_row(sample))
            finally:
                if self._fh is not None:
                    self._fh.flush()
        return ids

    def __len__(self) -> int:
        with self._lock:
            return len(self._samples)

    def get(self, record_id: int) -> MetricSample:
        with self._lock:
            if not 1 <= record_id <= len(self._samples):
                raise KeyError(f"no record {record_id}")
            return self._samples[record_id - 1]

    def snapshot(self) -> list[MetricSample]:
        """All samples in append order. A copy; safe to use without the lock."""
        with self._lock:
            return list(self._samples)

    def query(
        self,
        algorithm: Algorithm | None = None,
        scenario: Scenario | None = None,
        since_ms: int | None = None,
        until_ms: int | None = None,
        last: int | None = None,
    ) -> list[tuple[int, MetricSample]]:
        """(id, sample) pairs matching the filters, sorted by (ts_ms, id).

        since_ms/until_ms are inclusive. last keeps only the most recent k
        of the matching set (by the same ordering).
        """
        with self._lock:
            if algorithm is None and scenario is None:
                entries = self._slice(self._ordered, since_ms, until_ms)
            else:
                keys = [
                    key for key in self._by_key
                    if (algorithm is None or key[0] is algorithm)
                    and (scenario is None or key[1] is scenario)
                ]
                merged: list[tuple[int, int]] = []
                for key in keys:
                    merged.extend(self._slice(self._by_key[key], since_ms, until_ms))
                merged.sort()
                entries = merged
            if last is not None and last >= 0:
                entries = entries[len(entries) - last:] if last else []
            return [(rid, self._samples[rid - 1]) for _, rid in entries]

    @staticmethod
    def _slice(
        entries: list[tuple[int, int]], since_ms: int | None, until_ms: int | None,
    ) -> list[tuple[int, int]]:
        lo = 0 if since_ms is None else bisect_left(entries, (since_ms, 0))
        hi = len(entries) if until_ms is None else bisect_right(entries, (until_ms, 1 << 62))
        return entries[lo:hi]

    def close(self) -> None:
        with self._lock:
            if self._fh is not None:
                self._fh.close()
                self._fh = None

    def __enter__(self) -> "SampleLog":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
