"""Domain model: samples, weight presets, algorithm profiles, readiness bands.

The types here are deliberately dumb. Construction never validates so that
CSV/JSON decoding can build records first and report problems with context
(line numbers, field names); callers that persist or score data run the
explicit validate_* helpers.

All value types are frozen. Anything that crosses a thread boundary in the
service layer is one of these, which is what makes the single-writer store
safe to snapshot without copying.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Union

from .errors import InvalidWeightsError, SampleValidationError

import math


class Algorithm(str, Enum):
    """Post-quantum schemes tracked by the scorer."""

    KYBER = "kyber"
    DILITHIUM = "dilithium"
    FALCON = "falcon"
    SPHINCSPLUS = "sphincsplus"
    NTRU = "ntru"


class Scenario(str, Enum):
    """Deployment placement of the device relative to its peer."""

    NEAR = "near"
    FAR = "far"


class Direction(str, Enum):
    """How a criterion enters a score: costs are subtracted, benefits added."""

    COST = "cost"
    BENEFIT = "benefit"


class PresetKind(str, Enum):
    BASIC = "basic"
    TUNED = "tuned"
    FUSION = "fusion"


class ReadinessLevel(str, Enum):
    EXCELLENT = "Excellent"
    GOOD = "Good"
    MODERATE = "Moderate"
    POOR = "Poor"
    UNUSABLE = "Unusable"


# Half-open bands (lower inclusive, upper exclusive) except the top one,
# which closes at the maximum score. Together they partition [0, 100].
READINESS_BANDS: tuple[tuple[float, float, ReadinessLevel], ...] = (
    (85.0, 100.0, ReadinessLevel.EXCELLENT),
    (70.0, 85.0, ReadinessLevel.GOOD),
    (50.0, 70.0, ReadinessLevel.MODERATE),
    (30.0, 50.0, ReadinessLevel.POOR),
    (0.0, 30.0, ReadinessLevel.UNUSABLE),
)


@dataclass(frozen=True, slots=True)
class MetricSample:
    """One telemetry observation from one device.

    Field order matches the CSV wire format exactly; keep them in sync.
    """

    ts_ms: int
    device_id: str
    algorithm: Algorithm
    scenario: Scenario
    latency_ms: float
    jitter_ms: float
    packet_loss_pct: float
    overhead_ms: float
    cpu_pct: float
    rssi_dbm: float
    energy_mj: float
    key_bytes: int

    def criteria(self) -> dict[str, float]:
        """The eight scoreable criteria as a name -> raw value map."""
        return {
            "latency_ms": self.latency_ms,
            "jitter_ms": self.jitter_ms,
            "packet_loss_pct": self.packet_loss_pct,
            "overhead_ms": self.overhead_ms,
            "cpu_pct": self.cpu_pct,
            "rssi_dbm": self.rssi_dbm,
            "energy_mj": self.energy_mj,
            "key_bytes": float(self.key_bytes),
        }


# Criterion ids double as CSV column names. Order matters for bounds tables
# and the heatmap report.
SAMPLE_CRITERIA: tuple[str, ...] = (
    "latency_ms",
    "jitter_ms",
    "packet_loss_pct",
    "overhead_ms",
    "cpu_pct",
    "rssi_dbm",
    "energy_mj",
    "key_bytes",
)

# Coefficient order is positional in the presets below: basic covers the
# first three, tuned appends cpu, energy, key size on the cost side and
# signal strength on the benefit side.
BASIC_COST_CRITERIA: tuple[str, ...] = ("latency_ms", "overhead_ms", "packet_loss_pct")
TUNED_COST_CRITERIA: tuple[str, ...] = (
    "latency_ms",
    "overhead_ms",
    "packet_loss_pct",
    "cpu_pct",
    "energy_mj",
    "key_bytes",
)
TUNED_BENEFIT_CRITERION = "rssi_dbm"

FUSION_PERF_CRITERIA: tuple[str, ...] = (
    "latency_ms",
    "jitter_ms",
    "packet_loss_pct",
    "energy_mj",
    "cpu_pct",
)
FUSION_SEC_CRITERIA: tuple[str, ...] = (
    "key_bytes",
    "robustness",
    "proven_resistance",
    "crypto_overhead",
)

# Directions of the sample criteria as used by the formulas. Signal strength
# is the one benefit measured per sample: a stronger (larger dBm) reading
# normalizes higher and is added, never subtracted.
CRITERION_DIRECTIONS: Mapping[str, Direction] = {
    "latency_ms": Direction.COST,
    "jitter_ms": Direction.COST,
    "packet_loss_pct": Direction.COST,
    "overhead_ms": Direction.COST,
    "cpu_pct": Direction.COST,
    "rssi_dbm": Direction.BENEFIT,
    "energy_mj": Direction.COST,
    "key_bytes": Direction.COST,
}


def validate_sample(sample: MetricSample) -> MetricSample:
    """Check field constraints, returning the sample or raising.

    Raises SampleValidationError naming the first offending field.
    """
    if not isinstance(sample.ts_ms, int) or sample.ts_ms <= 0:
        raise SampleValidationError("ts_ms", "must be a positive integer of epoch milliseconds")
    if not sample.device_id:
        raise SampleValidationError("device_id", "must be non-empty")
    if any(ord(ch) < 32 or ord(ch) == 127 for ch in sample.device_id):
        # control characters would corrupt line-oriented exports
        raise SampleValidationError("device_id", "must not contain control characters")
    if not isinstance(sample.algorithm, Algorithm):
        raise SampleValidationError("algorithm", f"unknown algorithm {sample.algorithm!r}")
    if not isinstance(sample.scenario, Scenario):
        raise SampleValidationError("scenario", f"unknown scenario {sample.scenario!r}")
    for name in ("latency_ms", "jitter_ms", "packet_loss_pct", "overhead_ms",
                 "cpu_pct", "rssi_dbm", "energy_mj"):
        value = getattr(sample, name)
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            raise SampleValidationError(name, "must be a finite number")
    for name in ("latency_ms", "jitter_ms", "overhead_ms", "energy_mj"):
        if getattr(sample, name) < 0:
            raise SampleValidationError(name, "must be non-negative")
    for name in ("packet_loss_pct", "cpu_pct"):
        value = getattr(sample, name)
        if not 0.0 <= value <= 100.0:
            raise SampleValidationError(name, "must lie in [0, 100]")
    if not isinstance(sample.key_bytes, int) or sample.key_bytes < 1:
        raise SampleValidationError("key_bytes", "must be an integer >= 1")
    return sample


@dataclass(frozen=True, slots=True)
class AlgorithmProfile:
    """Static per-algorithm facts used by the simulator and the fusion score.

    key_bytes_range and payload_bytes_range describe realistic public key and
    ciphertext/signature sizes. The three ratings live on the score scale
    [0, 100] and feed the security side of the fusion formula directly. The
    rating values shipped here are calibration defaults, not measurements;
    deployments that disagree override them in the JSON config.
    """

    algorithm: Algorithm
    key_bytes_range: tuple[int, int]
    payload_bytes_range: tuple[int, int]
    robustness: float
    proven_resistance: float
    crypto_overhead: float
    notes: str = ""


BUILTIN_PROFILES: Mapping[Algorithm, AlgorithmProfile] = {
    Algorithm.KYBER: AlgorithmProfile(
        Algorithm.KYBER, (800, 1500), (768, 1088), 68.0, 72.0, 62.0,
        notes="lattice KEM, small ciphertexts",
    ),
    Algorithm.DILITHIUM: AlgorithmProfile(
        Algorithm.DILITHIUM, (1312, 2544), (2420, 3500), 88.0, 90.0, 85.0,
        notes="lattice signatures, large keys and signatures",
    ),
    Algorithm.FALCON: AlgorithmProfile(
        Algorithm.FALCON, (897, 1280), (690, 1024), 80.0, 80.0, 70.0,
        notes="compact lattice signatures, float-heavy signing",
    ),
    Algorithm.SPHINCSPLUS: AlgorithmProfile(
        Algorithm.SPHINCSPLUS, (32, 64), (8000, 16000), 75.0, 95.0, 60.0,
        notes="stateless hash-based signatures, tiny keys, huge signatures",
    ),
    Algorithm.NTRU: AlgorithmProfile(
        Algorithm.NTRU, (1138, 1420), (1138, 1420), 90.0, 85.0, 75.0,
        notes="long-studied lattice KEM",
    ),
}


def profile_to_dict(profile: AlgorithmProfile) -> dict:
    return {
        "algorithm": profile.algorithm.value,
        "key_bytes_range": list(profile.key_bytes_range),
        "payload_bytes_range": list(profile.payload_bytes_range),
        "robustness": profile.robustness,
        "proven_resistance": profile.proven_resistance,
        "crypto_overhead": profile.crypto_overhead,
        "notes": profile.notes,
    }


def profile_from_dict(data: Mapping) -> AlgorithmProfile:
    try:
        algorithm = Algorithm(data["algorithm"])
        key_range = tuple(int(v) for v in data["key_bytes_range"])
        payload_range = tuple(int(v) for v in data["payload_bytes_range"])
        profile = AlgorithmProfile(
            algorithm=algorithm,
            key_bytes_range=(key_range[0], key_range[1]),
            payload_bytes_range=(payload_range[0], payload_range[1]),
            robustness=float(data["robustness"]),
            proven_resistance=float(data["proven_resistance"]),
            crypto_overhead=float(data["crypto_overhead"]),
            notes=str(data.get("notes", "")),
        )
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise SampleValidationError("profile", f"malformed profile: {exc}") from exc
    for label, (lo, hi) in (
        ("key_bytes_range", profile.key_bytes_range),
        ("payload_bytes_range", profile.payload_bytes_range),
    ):
        if lo < 1 or hi < lo:
            raise SampleValidationError(label, f"invalid range ({lo}, {hi})")
    for label in ("robustness", "proven_resistance", "crypto_overhead"):
        value = getattr(profile, label)
        if not math.isfinite(value) or not 0.0 <= value <= 100.0:
            raise SampleValidationError(label, f"rating {value!r} outside [0, 100]")
    return profile


@dataclass(frozen=True, slots=True)
class BasicPreset:
    """Coefficients for the three-term score: latency, overhead, loss."""

    name: str
    alpha: float
    beta: float
    gamma: float

    kind = PresetKind.BASIC

    def cost_coefficients(self) -> tuple[float, ...]:
        return (self.alpha, self.beta, self.gamma)


@dataclass(frozen=True, slots=True)
class TunedPreset:
    """Seven-coefficient score. Six costs plus one signal-strength benefit.

    Positional meaning: alpha latency, beta overhead, gamma packet loss,
    delta cpu, zeta energy, eta key size, and epsilon scales the signal
    benefit. Coefficients are not required to sum to anything; the tuned
    score trades interpretability of the total for per-criterion control.
    """

    name: str
    alpha: float
    beta: float
    gamma: float
    delta: float
    epsilon: float
    zeta: float
    eta: float

    kind = PresetKind.TUNED

    def cost_coefficients(self) -> tuple[float, ...]:
        # Order matches TUNED_COST_CRITERIA.
        return (self.alpha, self.beta, self.gamma, self.delta, self.zeta, self.eta)


@dataclass(frozen=True, slots=True)
class FusionPreset:
    """Two weighted subscores blended into one number.

    performance_weights spans FUSION_PERF_CRITERIA, security_weights spans
    FUSION_SEC_CRITERIA; each vector sums to one. performance_share and
    security_share blend the performance penalty against the security
    subscore and must also sum to one. security_directions lets a deployment
    flip an individual security criterion to cost-direction; by default all
    four contribute as benefits.
    """

    name: str
    performance_weights: Mapping[str, float]
    security_weights: Mapping[str, float]
    performance_share: float = 0.5
    security_share: float = 0.5
    security_directions: Mapping[str, Direction] = field(default_factory=dict)

    kind = PresetKind.FUSION

    def direction_of(self, criterion: str) -> Direction:
        return self.security_directions.get(criterion, Direction.BENEFIT)


WeightPreset = Union[BasicPreset, TunedPreset, FusionPreset]

WEIGHT_SUM_TOL = 1e-9


def _check_coefficients(name: str, pairs: list[tuple[str, float]]) -> None:
    for label, value in pairs:
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            raise InvalidWeightsError(f"preset {name!r}: {label} must be a finite number")
        if value < 0:
            raise InvalidWeightsError(f"preset {name!r}: {label} must be non-negative")


def validate_preset(preset: WeightPreset) -> WeightPreset:
    """Check a preset's structural rules, returning it or raising.

    Basic and tuned presets only need finite non-negative coefficients.
    Fusion presets additionally need each weight vector to cover its
    criterion set exactly and sum to one, and the two shares to sum to one.
    """
    if not preset.name:
        raise InvalidWeightsError("preset name must be non-empty")
    if isinstance(preset, BasicPreset):
        _check_coefficients(preset.name, [
            ("alpha", preset.alpha), ("beta", preset.beta), ("gamma", preset.gamma),
        ])
        return preset
    if isinstance(preset, TunedPreset):
        _check_coefficients(preset.name, [
            ("alpha", preset.alpha), ("beta", preset.beta), ("gamma", preset.gamma),
            ("delta", preset.delta), ("epsilon", preset.epsilon),
            ("zeta", preset.zeta), ("eta", preset.eta),
        ])
        return preset
    if isinstance(preset, FusionPreset):
        for label, weights, wanted in (
            ("performance_weights", preset.performance_weights, FUSION_PERF_CRITERIA),
            ("security_weights", preset.security_weights, FUSION_SEC_CRITERIA),
        ):
            if set(weights) != set(wanted):
                raise InvalidWeightsError(
                    f"preset {preset.name!r}: {label} must cover exactly {sorted(wanted)}"
                )
            _check_coefficients(preset.name, list(weights.items()))
            total = sum(weights.values())
            if abs(total - 1.0) > WEIGHT_SUM_TOL:
                raise InvalidWeightsError(
                    f"preset {preset.name!r}: {label} sums to {total!r}, expected 1"
                )
        _check_coefficients(preset.name, [
            ("performance_share", preset.performance_share),
            ("security_share", preset.security_share),
        ])
        if abs(preset.performance_share + preset.security_share - 1.0) > WEIGHT_SUM_TOL:
            raise InvalidWeightsError(
                f"preset {preset.name!r}: shares sum to "
                f"{preset.performance_share + preset.security_share!r}, expected 1"
            )
        for criterion in preset.security_directions:
            if criterion not in FUSION_SEC_CRITERIA:
                raise InvalidWeightsError(
                    f"preset {preset.name!r}: security_directions names "
                    f"unknown criterion {criterion!r}"
                )
        return preset
    raise InvalidWeightsError(f"unsupported preset type {type(preset).__name__}")


def preset_to_dict(preset: WeightPreset) -> dict:
    """Plain-JSON form, the shape used by the config file and the HTTP API."""
    if isinstance(preset, BasicPreset):
        return {
            "name": preset.name, "kind": "basic",
            "alpha": preset.alpha, "beta": preset.beta, "gamma": preset.gamma,
        }
    if isinstance(preset, TunedPreset):
        return {
            "name": preset.name, "kind": "tuned",
            "alpha": preset.alpha, "beta": preset.beta, "gamma": preset.gamma,
            "delta": preset.delta, "epsilon": preset.epsilon,
            "zeta": preset.zeta, "eta": preset.eta,
        }
    if isinstance(preset, FusionPreset):
        out: dict = {
            "name": preset.name, "kind": "fusion",
            "performance_weights": dict(preset.performance_weights),
            "security_weights": dict(preset.security_weights),
            "performance_share": preset.performance_share,
            "security_share": preset.security_share,
        }
        if preset.security_directions:
            out["security_directions"] = {
                k: v.value for k, v in preset.security_directions.items()
            }
        return out
    raise InvalidWeightsError(f"unsupported preset type {type(preset).__name__}")


def preset_from_dict(data: Mapping) -> WeightPreset:
    """Inverse of preset_to_dict. Validates before returning."""
    try:
        kind = PresetKind(data.get("kind", ""))
    except ValueError:
        raise InvalidWeightsError(f"unknown preset kind {data.get('kind')!r}") from None
    name = data.get("name", "")
    try:
        if kind is PresetKind.BASIC:
            preset: WeightPreset = BasicPreset(
                name, float(data["alpha"]), float(data["beta"]), float(data["gamma"]),
            )
        elif kind is PresetKind.TUNED:
            preset = TunedPreset(
                name, float(data["alpha"]), float(data["beta"]), float(data["gamma"]),
                float(data["delta"]), float(data["epsilon"]),
                float(data["zeta"]), float(data["eta"]),
            )
        else:
            directions = {
                k: Direction(v)
                for k, v in dict(data.get("security_directions", {})).items()
            }
            preset = FusionPreset(
                name,
                {k: float(v) for k, v in dict(data["performance_weights"]).items()},
                {k: float(v) for k, v in dict(data["security_weights"]).items()},
                float(data.get("performance_share", 0.5)),
                float(data.get("security_share", 0.5)),
                directions,
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidWeightsError(f"preset {name!r}: {exc}") from exc
    return validate_preset(preset)


def _builtin_presets() -> dict[str, WeightPreset]:
    presets: list[WeightPreset] = [
        # Latency-first: real-time streams where stalls dominate experience.
        BasicPreset("Basic-RT", 0.55, 0.20, 0.15),
        # Overhead-first: battery or duty-cycle constrained links.
        BasicPreset("Basic-EC", 0.25, 0.45, 0.20),
        # Balanced default.
        BasicPreset("Basic-B", 0.35, 0.30, 0.20),
        TunedPreset("Tuned-RT", 0.55, 0.20, 0.15, 0.05, 0.025, 0.025, 0.05),
        TunedPreset("Tuned-EC", 0.25, 0.45, 0.20, 0.025, 0.025, 0.05, 0.05),
        TunedPreset("Tuned-B", 0.35, 0.30, 0.20, 0.05, 0.05, 0.05, 0.05),
        FusionPreset(
            "Fusion-default",
            performance_weights={
                "latency_ms": 0.3,
                "jitter_ms": 0.1,
                "packet_loss_pct": 0.2,
                "energy_mj": 0.2,
                "cpu_pct": 0.2,
            },
            security_weights={
                "key_bytes": 0.25,
                "robustness": 0.35,
                "proven_resistance": 0.25,
                "crypto_overhead": 0.15,
            },
        ),
    ]
    return {p.name: validate_preset(p) for p in presets}


BUILTIN_PRESETS: Mapping[str, WeightPreset] = _builtin_presets()

DEFAULT_ACTIVE: Mapping[PresetKind, str] = {
    PresetKind.BASIC: "Basic-B",
    PresetKind.TUNED: "Tuned-B",
    PresetKind.FUSION: "Fusion-default",
}


@dataclass(frozen=True, slots=True)
class PresetTriple:
    """The three presets applied together when scoring one sample."""

    basic: BasicPreset
    tuned: TunedPreset
    fusion: FusionPreset

    @property
    def label(self) -> str:
        # "+" keeps the combined label CSV-safe (no quoting needed).
        return f"{self.basic.name}+{self.tuned.name}+{self.fusion.name}"

    def replace(self, preset: WeightPreset) -> "PresetTriple":
        """A copy with the slot matching the preset's kind swapped out."""
        if isinstance(preset, BasicPreset):
            return PresetTriple(preset, self.tuned, self.fusion)
        if isinstance(preset, TunedPreset):
            return PresetTriple(self.basic, preset, self.fusion)
        return PresetTriple(self.basic, self.tuned, preset)


def default_triple() -> PresetTriple:
    return PresetTriple(
        BUILTIN_PRESETS["Basic-B"],      # type: ignore[arg-type]
        BUILTIN_PRESETS["Tuned-B"],      # type: ignore[arg-type]
        BUILTIN_PRESETS["Fusion-default"],  # type: ignore[arg-type]
    )


@dataclass(frozen=True, slots=True)
class ScoreRecord:
    """A scored sample as persisted and streamed by the service.

    fusion is the analytic blend; ml_fusion is the forest's estimate of the
    same quantity with its empirical interval. Both routes are kept so that
    drift between them stays observable. When no model is loaded the ml
    fields fall back to the analytic value with a zero-width interval.
    """

    record_id: int
    sample: MetricSample
    basic: float
    tuned: float
    fusion: float
    readiness: ReadinessLevel
    smoothed_fusion: float
    ml_fusion: float
    ml_lo: float
    ml_hi: float
    preset_name: str


def validate_record(record: ScoreRecord, ms: float = 100.0) -> ScoreRecord:
    for label in ("basic", "tuned", "fusion", "smoothed_fusion"):
        value = getattr(record, label)
        if not 0.0 <= value <= ms:
            raise SampleValidationError(label, f"score {value!r} outside [0, {ms}]")
    if not record.ml_lo <= record.ml_fusion <= record.ml_hi:
        raise SampleValidationError(
            "ml_fusion", "estimate must lie inside its interval")
    return record
