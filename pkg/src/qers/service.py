"""HTTP service: ingestion, score queries, presets, reports, live stream.

All endpoints live under /api/v1. The raw sample log is the only durable
state; scores are derived and rebuilt deterministically on startup by
replaying the log through a rolling scoring session, so restarting a
service over the same store yields the same records. Each accepted sample
is scored against the rolling window active at ingestion time and emits
exactly one server-sent event.

Ingestion accepts a JSON object, a JSON array, or a CSV batch in the wire
format. Batches are partially accepted: bad rows come back itemized while
good rows land.
"""

from __future__ import annotations

import asyncio
import json
from dataclasses import replace as dc_replace
from typing import Mapping

from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.responses import PlainTextResponse, StreamingResponse
from pydantic import BaseModel, ValidationError

from . import forest as forest_mod
from .config import AppConfig
from .errors import (
    ConfigError,
    CsvParseError,
    EmptyDatasetError,
    InvalidWeightsError,
    QersError,
    SampleValidationError,
    UnknownHeaderError,
)
from .model import (
    Algorithm,
    MetricSample,
    PresetKind,
    SAMPLE_CRITERIA,
    Scenario,
    ScoreRecord,
    WeightPreset,
    preset_from_dict,
    preset_to_dict,
)
from .reports import (
    aggregate_rows,
    distribution_view,
    filter_records,
    heatmap_view,
)
from .scoring import ScoringSession, score_pipeline
from .store import SampleLog, export_csv, export_scores_csv, import_csv
import io

API_PREFIX = "/api/v1"


class SampleIn(BaseModel):
    ts_ms: int
    device_id: str
    algorithm: str
    scenario: str
    latency_ms: float
    jitter_ms: float
    packet_loss_pct: float
    overhead_ms: float
    cpu_pct: float
    rssi_dbm: float
    energy_mj: float
    key_bytes: int

    def to_sample(self) -> MetricSample:
        try:
            algorithm = Algorithm(self.algorithm)
        except ValueError:
            raise SampleValidationError(
                "algorithm", f"unknown algorithm {self.algorithm!r}") from None
        try:
            scenario = Scenario(self.scenario)
        except ValueError:
            raise SampleValidationError(
                "scenario", f"unknown scenario {self.scenario!r}") from None
        return MetricSample(
            ts_ms=self.ts_ms,
            device_id=self.device_id,
            algorithm=algorithm,
            scenario=scenario,
            latency_ms=self.latency_ms,
            jitter_ms=self.jitter_ms,
            packet_loss_pct=self.packet_loss_pct,
            overhead_ms=self.overhead_ms,
            cpu_pct=self.cpu_pct,
            rssi_dbm=self.rssi_dbm,
            energy_mj=self.energy_mj,
            key_bytes=self.key_bytes,
        )


class PreviewBody(BaseModel):
    # Either the name of a catalog preset or an inline preset definition.
    preset: str | dict
    algorithm: str | None = None
    scenario: str | None = None
    window: int | None = None
    metric_overrides: dict[str, float] | None = None


class ActivateBody(BaseModel):
    name: str


class EventBus:
    """Fan-out of pre-rendered SSE frames to per-subscriber queues.

    Publishing appends to every live queue in order, so each subscriber
    sees events in publish order. Subscribing only wires up future events;
    there is no replay.
    """

    def __init__(self) -> None:
        self._queues: list[asyncio.Queue[str]] = []

    def subscribe(self) -> asyncio.Queue[str]:
        queue: asyncio.Queue[str] = asyncio.Queue()
        self._queues.append(queue)
        return queue

    def unsubscribe(self, queue: asyncio.Queue[str]) -> None:
        try:
            self._queues.remove(queue)
        except ValueError:
            pass

    def publish(self, frame: str) -> None:
        for queue in self._queues:
            queue.put_nowait(frame)

    @property
    def subscriber_count(self) -> int:
        return len(self._queues)


def record_to_json_dict(record: ScoreRecord) -> dict:
    sample = record.sample
    return {
        "record_id": record.record_id,
        "sample": {
            "ts_ms": sample.ts_ms,
            "device_id": sample.device_id,
            "algorithm": sample.algorithm.value,
            "scenario": sample.scenario.value,
            "latency_ms": sample.latency_ms,
            "jitter_ms": sample.jitter_ms,
            "packet_loss_pct": sample.packet_loss_pct,
            "overhead_ms": sample.overhead_ms,
            "cpu_pct": sample.cpu_pct,
            "rssi_dbm": sample.rssi_dbm,
            "energy_mj": sample.energy_mj,
            "key_bytes": sample.key_bytes,
        },
        "qers_basic": record.basic,
        "qers_tuned": record.tuned,
        "qers_fusion": record.fusion,
        "readiness": record.readiness.value,
        "smoothed_fusion": record.smoothed_fusion,
        "ml_fusion": record.ml_fusion,
        "ml_lo": record.ml_lo,
        "ml_hi": record.ml_hi,
        "preset": record.preset_name,
    }


def _sse_frame(record: ScoreRecord) -> str:
    payload = json.dumps(record_to_json_dict(record), separators=(",", ":"))
    return f"id: {record.record_id}\nevent: score\ndata: {payload}\n\n"


class ServiceState:
    def __init__(self, config: AppConfig, store: SampleLog):
        self.config = config
        self.store = store
        self.presets = config.preset_catalog()
        self.profiles = config.profile_catalog()
        self.active: dict[PresetKind, str] = dict(config.active)
        model = None
        if config.model_path:
            model = forest_mod.load_model(config.model_path)
            unknown = set(model.feature_names_) - set(SAMPLE_CRITERIA)
            if unknown:
                raise ConfigError(
                    f"model at {config.model_path} uses unknown features: "
                    f"{sorted(unknown)}")
        self.session = ScoringSession(
            triple=config.active_triple(),
            profiles=self.profiles,
            ms=config.ms,
            smoothing_lam=config.smoothing_lambda,
            window=config.window,
            model=model,
        )
        self.records: list[ScoreRecord] = []
        self.bus = EventBus()
        self.ingest_lock = asyncio.Lock()
        # Rebuild derived state from the durable log.
        for sample in store.snapshot():
            record = self.session.score(sample, len(self.records) + 1)
            self.records.append(record)

    def ingest(self, sample: MetricSample) -> ScoreRecord:
        """Append, score and announce one sample. Caller holds ingest_lock."""
        record_id = self.store.append(sample)
        record = self.session.score(sample, record_id)
        self.records.append(record)
        self.bus.publish(_sse_frame(record))
        return record

    def activate(self, preset: WeightPreset) -> None:
        self.active[preset.kind] = preset.name
        self.session.triple = self.session.triple.replace(preset)


def _parse_algorithm(value: str | None) -> Algorithm | None:
    if value is None:
        return None
    try:
        return Algorithm(value)
    except ValueError:
        raise HTTPException(status_code=400, detail=f"unknown algorithm {value!r}") from None


def _parse_scenario(value: str | None) -> Scenario | None:
    if value is None:
        return None
    try:
        return Scenario(value)
    except ValueError:
        raise HTTPException(status_code=400, detail=f"unknown scenario {value!r}") from None


def create_app(config: AppConfig | None = None, store: SampleLog | None = None) -> FastAPI:
    """Build the service. A store given explicitly overrides the config path
    (used by tests to run fully in memory)."""
    config = config or AppConfig()
    store = store if store is not None else SampleLog(config.store_path)
    state = ServiceState(config, store)
    app = FastAPI(title="qers", version="0.1.0", docs_url=None, redoc_url=None)
    app.state.qers = state

    @app.get(API_PREFIX + "/health")
    async def health() -> dict:
        return {"status": "ok", "samples": len(state.store), "records": len(state.records)}

    @app.post(API_PREFIX + "/samples")
    async def post_samples(request: Request) -> dict:
        content_type = request.headers.get("content-type", "").split(";")[0].strip()
        body = await request.body()
        accepted_ids: list[int] = []
        rejected: list[dict] = []
        staged: list[tuple[int, MetricSample]] = []

        if content_type == "text/csv":
            try:
                samples = import_csv(io.StringIO(body.decode("utf-8")))
            except UnknownHeaderError as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from exc
            except CsvParseError:
                # Re-parse row by row so good rows still land.
                samples = None
            if samples is None:
                import csv as _csv
                reader = _csv.reader(io.StringIO(body.decode("utf-8")))
                header = next(reader)
                from .store import WIRE_FIELDS, row_to_sample
                if list(header) != list(WIRE_FIELDS):
                    raise HTTPException(status_code=400, detail="unexpected CSV header")
                for row in reader:
                    if not row:
                        continue
                    line = reader.line_num
                    try:
                        staged.append((line, row_to_sample(row, line)))
                    except CsvParseError as exc:
                        rejected.append({"line": exc.line, "reason": exc.reason})
            else:
                staged = [(i + 2, s) for i, s in enumerate(samples)]  # header is line 1
        else:
            try:
                payload = json.loads(body)
            except json.JSONDecodeError as exc:
                raise HTTPException(status_code=400, detail=f"invalid JSON body: {exc}") from exc
            items = payload if isinstance(payload, list) else [payload]
            for i, item in enumerate(items):
                try:
                    staged.append((i, SampleIn.model_validate(item).to_sample()))
                except ValidationError as exc:
                    first = exc.errors()[0]
                    field = ".".join(str(p) for p in first.get("loc", ()))
                    rejected.append({"index": i, "reason": f"{field}: {first.get('msg')}"})
                except SampleValidationError as exc:
                    rejected.append({"index": i, "reason": str(exc)})

        async with state.ingest_lock:
            for position, sample in staged:
                try:
                    record = state.ingest(sample)
                    accepted_ids.append(record.record_id)
                except SampleValidationError as exc:
                    key = "line" if content_type == "text/csv" else "index"
                    rejected.append({key: position, "reason": str(exc)})
        return {"accepted": len(accepted_ids), "rejected": rejected,
                "record_ids": accepted_ids}

    @app.get(API_PREFIX + "/scores")
    async def get_scores(
        algorithm: str | None = None,
        scenario: str | None = None,
        window: int | None = Query(default=None, ge=0),
        recompute: bool = False,
    ) -> dict:
        alg = _parse_algorithm(algorithm)
        scen = _parse_scenario(scenario)
        records = filter_records(state.records, alg, scen, window)
        if recompute and records:
            samples = [r.sample for r in records]
            records = score_pipeline(
                samples, triple=state.session.triple, profiles=state.profiles,
                ms=config.ms, smoothing_lam=config.smoothing_lambda,
                bounds_mode="global")
        return {"rows": aggregate_rows(records, config.ms), "count": len(records),
                "recomputed": bool(recompute)}

    @app.post(API_PREFIX + "/score/preview")
    async def score_preview(body: PreviewBody) -> dict:
        if isinstance(body.preset, str):
            preset = state.presets.get(body.preset)
            if preset is None:
                raise HTTPException(status_code=404,
                                    detail=f"unknown preset {body.preset!r}")
        else:
            try:
                preset = preset_from_dict(body.preset)
            except InvalidWeightsError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
        alg = _parse_algorithm(body.algorithm)
        scen = _parse_scenario(body.scenario)
        samples = state.store.snapshot()
        if body.metric_overrides:
            bad = set(body.metric_overrides) - set(SAMPLE_CRITERIA)
            if bad:
                raise HTTPException(
                    status_code=422,
                    detail=f"unknown metric_overrides keys: {sorted(bad)}")
            updates = dict(body.metric_overrides)
            if "key_bytes" in updates:
                updates["key_bytes"] = int(updates["key_bytes"])
            samples = [dc_replace(s, **updates) for s in samples]
        triple = state.session.triple.replace(preset)
        if samples:
            records = score_pipeline(
                samples, triple=triple, profiles=state.profiles, ms=config.ms,
                smoothing_lam=config.smoothing_lambda, bounds_mode="rolling",
                window=config.window)
        else:
            records = []
        records = filter_records(records, alg, scen, body.window)
        return {"rows": aggregate_rows(records, config.ms), "count": len(records),
                "preview": True, "preset": preset.name}

    @app.get(API_PREFIX + "/presets")
    async def get_presets() -> dict:
        return {
            "presets": [preset_to_dict(p) for p in state.presets.values()],
            "active": {kind.value: name for kind, name in state.active.items()},
        }

    @app.put(API_PREFIX + "/presets/active")
    async def put_active(body: ActivateBody) -> dict:
        preset = state.presets.get(body.name)
        if preset is None:
            raise HTTPException(status_code=404, detail=f"unknown preset {body.name!r}")
        state.activate(preset)
        return {"active": {kind.value: name for kind, name in state.active.items()}}

    @app.get(API_PREFIX + "/report/heatmap")
    async def report_heatmap(
        scenario: str | None = None,
        window: int | None = Query(default=None, ge=0),
    ) -> dict:
        scen = _parse_scenario(scenario)
        records = filter_records(state.records, None, scen, window)
        try:
            return heatmap_view(
                [r.sample for r in records], state.session.triple,
                state.profiles, config.ms)
        except EmptyDatasetError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc

    @app.get(API_PREFIX + "/report/distribution")
    async def report_distribution(
        algorithm: str | None = None,
        scenario: str | None = None,
        window: int | None = Query(default=None, ge=0),
    ) -> dict:
        alg = _parse_algorithm(algorithm)
        scen = _parse_scenario(scenario)
        records = filter_records(state.records, alg, scen, window)
        try:
            return distribution_view(records)
        except EmptyDatasetError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc

    @app.get(API_PREFIX + "/samples.csv")
    async def samples_csv() -> PlainTextResponse:
        buf = io.StringIO()
        export_csv(state.store.snapshot(), buf)
        return PlainTextResponse(buf.getvalue(), media_type="text/csv")

    @app.get(API_PREFIX + "/scores.csv")
    async def scores_csv() -> PlainTextResponse:
        buf = io.StringIO()
        export_scores_csv(list(state.records), buf)
        return PlainTextResponse(buf.getvalue(), media_type="text/csv")

    @app.get(API_PREFIX + "/stream")
    async def stream(request: Request) -> StreamingResponse:
        queue = state.bus.subscribe()

        async def gen():
            try:
                yield "retry: 2000\n\n"
                while True:
                    if await request.is_disconnected():
                        break
                    try:
                        frame = await asyncio.wait_for(queue.get(), timeout=15.0)
                    except asyncio.TimeoutError:
                        yield ": keepalive\n\n"
                        continue
                    yield frame
            finally:
                state.bus.unsubscribe(queue)

        return StreamingResponse(gen(), media_type="text/event-stream")

    @app.exception_handler(QersError)
    async def qers_error_handler(_request: Request, exc: QersError):
        from fastapi.responses import JSONResponse
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    return app
