"""Quantum Encryption Resilience Score toolkit.

Scores post-quantum crypto deployments from device telemetry: three
analytic score variants on a shared 0..100 scale, readiness bands, a
forest-based estimator that cross-checks the fusion score, a deterministic
fleet simulator, an append-only sample store, an HTTP service, and a CLI.
"""

from .errors import QersError
from .model import (
    Algorithm,
    AlgorithmProfile,
    BUILTIN_PRESETS,
    BUILTIN_PROFILES,
    BasicPreset,
    Direction,
    FusionPreset,
    MetricSample,
    PresetKind,
    PresetTriple,
    ReadinessLevel,
    Scenario,
    ScoreRecord,
    TunedPreset,
    WeightPreset,
    default_triple,
    validate_preset,
    validate_sample,
)
from .normalization import NormalizationBounds, WindowNormalizer, derive_bounds, normalize
from .scoring import (
    ExponentialSmoother,
    ScoringSession,
    SmoothingState,
    build_security_vector,
    classify,
    score_basic,
    score_fusion,
    score_pipeline,
    score_tuned,
    smooth_step,
)
from .forest import (
    FUSION_FEATURES,
    FusionForestRegressor,
    load_model,
    save_model,
    train_fusion_model,
)
from .synthetic import SyntheticSpec, fit_synthetic_spec, generate_synthetic
from .simulator import FleetConfig, iter_fleet, run_fleet
from .store import SampleLog, export_csv, import_csv

__version__ = "0.1.0"

__all__ = [
    "Algorithm",
    "AlgorithmProfile",
    "BUILTIN_PRESETS",
    "BUILTIN_PROFILES",
    "BasicPreset",
    "Direction",
    "ExponentialSmoother",
    "FUSION_FEATURES",
    "FleetConfig",
    "FusionForestRegressor",
    "FusionPreset",
    "MetricSample",
    "NormalizationBounds",
    "PresetKind",
    "PresetTriple",
    "QersError",
    "ReadinessLevel",
    "SampleLog",
    "Scenario",
    "ScoreRecord",
    "ScoringSession",
    "SmoothingState",
    "SyntheticSpec",
    "TunedPreset",
    "WeightPreset",
    "WindowNormalizer",
    "build_security_vector",
    "classify",
    "default_triple",
    "derive_bounds",
    "export_csv",
    "fit_synthetic_spec",
    "generate_synthetic",
    "import_csv",
    "iter_fleet",
    "load_model",
    "normalize",
    "run_fleet",
    "save_model",
    "score_basic",
    "score_fusion",
    "score_pipeline",
    "score_tuned",
    "smooth_step",
    "train_fusion_model",
    "validate_preset",
    "validate_sample",
    "__version__",
]
