"""The qers.config.json file and its environment overrides.

One JSON document configures everything the CLI and service need: the
score scale, smoothing weight, ingestion window, bind address, store path,
optional model path, extra weight presets, profile overrides, and which
presets start active. Every key is optional; an empty object is a valid
config and yields the shipped defaults.

Environment variables QERS_BIND and QERS_STORE override the corresponding
config values, and QERS_CONFIG names the config file itself when no --config
flag is given. Flags beat environment, environment beats file.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from typing import Mapping

from .errors import ConfigError, InvalidWeightsError, SampleValidationError, UnknownPresetError
from .model import (
    Algorithm,
    AlgorithmProfile,
    BUILTIN_PRESETS,
    BUILTIN_PROFILES,
    BasicPreset,
    DEFAULT_ACTIVE,
    FusionPreset,
    PresetKind,
    PresetTriple,
    TunedPreset,
    WeightPreset,
    preset_from_dict,
    profile_from_dict,
)

ENV_BIND = "QERS_BIND"
ENV_STORE = "QERS_STORE"
ENV_CONFIG = "QERS_CONFIG"

DEFAULT_CONFIG_FILENAME = "qers.config.json"

_ALLOWED_KEYS = {
    "ms",
    "smoothing_lambda",
    "window",
    "bind",
    "store_path",
    "model_path",
    "active_presets",
    "presets",
    "profiles",
}

_KIND_TYPES = {
    PresetKind.BASIC: BasicPreset,
    PresetKind.TUNED: TunedPreset,
    PresetKind.FUSION: FusionPreset,
}


@dataclass(frozen=True, slots=True)
class AppConfig:
    ms: float = 100.0
    smoothing_lambda: float = 0.3
    window: int = 500
    bind: str = "127.0.0.1:8765"
    store_path: str = "qers-samples.csv"
    model_path: str | None = None
    active: Mapping[PresetKind, str] = field(default_factory=lambda: dict(DEFAULT_ACTIVE))
    extra_presets: tuple[WeightPreset, ...] = ()
    profile_overrides: tuple[AlgorithmProfile, ...] = ()

    def preset_catalog(self) -> dict[str, WeightPreset]:
        """Built-ins plus configured extras. Built-ins cannot be shadowed."""
        catalog = dict(BUILTIN_PRESETS)
        for preset in self.extra_presets:
            if preset.name in BUILTIN_PRESETS:
                raise ConfigError(
                    f"preset {preset.name!r} shadows a built-in; pick another name")
            catalog[preset.name] = preset
        return catalog

    def profile_catalog(self) -> dict[Algorithm, AlgorithmProfile]:
        catalog = dict(BUILTIN_PROFILES)
        for profile in self.profile_overrides:
            catalog[profile.algorithm] = profile
        return catalog

    def active_triple(self) -> PresetTriple:
        catalog = self.preset_catalog()
        chosen: dict[PresetKind, WeightPreset] = {}
        for kind in PresetKind:
            name = self.active.get(kind, DEFAULT_ACTIVE[kind])
            try:
                preset = catalog[name]
            except KeyError:
                raise UnknownPresetError(name) from None
            if not isinstance(preset, _KIND_TYPES[kind]):
                raise ConfigError(
                    f"active {kind.value} preset {name!r} is a "
                    f"{preset.kind.value} preset")
            chosen[kind] = preset
        return PresetTriple(
            chosen[PresetKind.BASIC], chosen[PresetKind.TUNED], chosen[PresetKind.FUSION])


def config_from_dict(data: Mapping) -> AppConfig:
    unknown = set(data) - _ALLOWED_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    base = AppConfig()
    try:
        ms = float(data.get("ms", base.ms))
        lam = float(data.get("smoothing_lambda", base.smoothing_lambda))
        window = int(data.get("window", base.window))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad numeric config value: {exc}") from exc
    if ms <= 0:
        raise ConfigError(f"ms must be positive, got {ms!r}")
    if not 0.0 < lam <= 1.0:
        raise ConfigError(f"smoothing_lambda must lie in (0, 1], got {lam!r}")
    if window < 1:
        raise ConfigError(f"window must be at least 1, got {window!r}")

    try:
        presets = tuple(preset_from_dict(p) for p in data.get("presets", []))
    except InvalidWeightsError as exc:
        raise ConfigError(str(exc)) from exc
    try:
        profiles = tuple(profile_from_dict(p) for p in data.get("profiles", []))
    except SampleValidationError as exc:
        raise ConfigError(str(exc)) from exc

    active = dict(DEFAULT_ACTIVE)
    for key, name in dict(data.get("active_presets", {})).items():
        try:
            kind = PresetKind(key)
        except ValueError:
            raise ConfigError(f"unknown preset kind {key!r} in active_presets") from None
        active[kind] = str(name)

    model_path = data.get("model_path", base.model_path)
    config = AppConfig(
        ms=ms,
        smoothing_lambda=lam,
        window=window,
        bind=str(data.get("bind", base.bind)),
        store_path=str(data.get("store_path", base.store_path)),
        model_path=str(model_path) if model_path is not None else None,
        active=active,
        extra_presets=presets,
        profile_overrides=profiles,
    )
    # Fail now, not on first request, if the active names do not resolve.
    config.active_triple()
    return config


def load_config(path: str) -> AppConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return config_from_dict(data)


def apply_env(config: AppConfig, environ: Mapping[str, str] | None = None) -> AppConfig:
    env = os.environ if environ is None else environ
    updates = {}
    if env.get(ENV_BIND):
        updates["bind"] = env[ENV_BIND]
    if env.get(ENV_STORE):
        updates["store_path"] = env[ENV_STORE]
    return replace(config, **updates) if updates else config


def parse_bind(bind: str) -> tuple[str, int]:
    host, sep, port = bind.rpartition(":")
    if not sep or not host:
        raise ConfigError(f"bind must look like host:port, got {bind!r}")
    try:
        port_num = int(port)
    except ValueError:
        raise ConfigError(f"bind port must be an integer, got {port!r}") from None
    if not 0 < port_num < 65536:
        raise ConfigError(f"bind port out of range: {port_num}")
    return host, port_num
