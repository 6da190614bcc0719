"""qers command line: serve, simulate, score, train, evaluate, report.

Exit codes: 0 success, 1 usage errors (bad flags, unknown names), 2 data
errors (parse failures, validation, insufficient or empty input), 3 I/O
errors (missing files, busy ports, unreachable push targets).
"""

from __future__ import annotations

import json
import os
import socket
import sys
import urllib.error
import urllib.request

import click

from . import forest as forest_mod
from .config import (
    AppConfig,
    ENV_CONFIG,
    apply_env,
    load_config,
    parse_bind,
)
from .errors import EmptyDatasetError, QersError
from .model import Algorithm, PresetTriple, Scenario
from .reports import distribution_view, heatmap_view, scatter_view
from .scoring import score_pipeline
from .simulator import FleetConfig, run_fleet
from .store import (
    export_csv,
    export_scores_csv,
    import_csv_path,
    samples_to_csv_text,
)

PUSH_ENDPOINT = "/api/v1/samples"


def _load_app_config(path: str | None) -> AppConfig:
    if path is None:
        path = os.environ.get(ENV_CONFIG) or None
    if path is None:
        return AppConfig()
    # A named config that does not exist is an I/O error, not a fallback.
    return load_config(path)


def _resolve_triple(config: AppConfig, preset_names: tuple[str, ...]) -> PresetTriple:
    triple = config.active_triple()
    catalog = config.preset_catalog()
    for name in preset_names:
        preset = catalog.get(name)
        if preset is None:
            raise click.UsageError(
                f"unknown preset {name!r}; available: {', '.join(sorted(catalog))}")
        triple = triple.replace(preset)
    return triple


def _parse_algorithms(spec: str) -> list[Algorithm]:
    names = [part.strip() for part in spec.split(",") if part.strip()]
    if not names:
        raise click.UsageError("--algorithms must name at least one algorithm")
    out = []
    for name in names:
        try:
            out.append(Algorithm(name))
        except ValueError:
            known = ", ".join(a.value for a in Algorithm)
            raise click.UsageError(
                f"unknown algorithm {name!r}; known: {known}") from None
    return out


_SCENARIOS = {
    "near": (Scenario.NEAR,),
    "far": (Scenario.FAR,),
    "both": (Scenario.NEAR, Scenario.FAR),
}


@click.group()
def cli() -> None:
    """Resilience scoring for post-quantum crypto telemetry."""


@cli.command()
@click.option("--config", "config_path", type=str, default=None,
              help=f"Config file (default: ${ENV_CONFIG} if set).")
@click.option("--bind", "bind_flag", type=str, default=None,
              help="host:port to listen on (overrides config and env).")
@click.option("--store", "store_flag", type=str, default=None,
              help="Sample log path (overrides config and env).")
def serve(config_path: str | None, bind_flag: str | None, store_flag: str | None) -> None:
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    config = apply_env(_load_app_config(config_path))
    if bind_flag:
        config = _replace(config, bind=bind_flag)
    if store_flag:
        config = _replace(config, store_path=store_flag)
    host, port = parse_bind(config.bind)
    # Claim the port up front so a busy port fails fast with a clear message.
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((host, port))
    except OSError as exc:
        raise OSError(f"cannot bind {host}:{port}: {exc.strerror or exc}") from exc
    finally:
        probe.close()
    app = create_app(config)
    click.echo(f"serving on http://{host}:{port} (store: {config.store_path})", err=True)
    uvicorn.run(app, host=host, port=port, log_level="warning")


def _replace(config: AppConfig, **kw) -> AppConfig:
    from dataclasses import replace
    return replace(config, **kw)


@cli.command()
@click.option("--devices", type=int, default=4, show_default=True)
@click.option("--algorithms", "algorithms_spec", type=str,
              default=",".join(a.value for a in Algorithm), show_default=True,
              help="Comma-separated algorithm names.")
@click.option("--scenario", type=click.Choice(["near", "far", "both"]),
              default="both", show_default=True)
@click.option("--samples", type=int, default=100, show_default=True,
              help="Samples per device per scenario.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--interval-ms", type=int, default=100, show_default=True)
@click.option("--out", "out_path", type=str, default=None,
              help="Write CSV here.")
@click.option("--push", "push_url", type=str, default=None,
              help="POST the batch to a running service (base URL).")
def simulate(devices: int, algorithms_spec: str, scenario: str, samples: int,
             seed: int, interval_ms: int, out_path: str | None,
             push_url: str | None) -> None:
    """Generate a deterministic telemetry run."""
    if out_path is None and push_url is None:
        raise click.UsageError("need --out and/or --push")
    if devices < 1:
        raise click.UsageError("--devices must be at least 1")
    if samples < 1:
        raise click.UsageError("--samples must be at least 1")
    config = FleetConfig(
        devices=devices,
        algorithms=tuple(_parse_algorithms(algorithms_spec)),
        scenarios=_SCENARIOS[scenario],
        samples_per_device=samples,
        seed=seed,
        interval_ms=interval_ms,
    )
    batch = run_fleet(config)
    if out_path is not None:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            export_csv(batch, fh)
        click.echo(f"wrote {len(batch)} samples to {out_path}", err=True)
    if push_url is not None:
        url = push_url.rstrip("/")
        if not url.endswith(PUSH_ENDPOINT):
            url += PUSH_ENDPOINT
        request = urllib.request.Request(
            url, data=samples_to_csv_text(batch).encode("utf-8"),
            headers={"Content-Type": "text/csv"}, method="POST")
        with urllib.request.urlopen(request, timeout=30) as response:
            result = json.loads(response.read().decode("utf-8"))
        click.echo(
            f"pushed {result.get('accepted', 0)} samples to {url} "
            f"({len(result.get('rejected', []))} rejected)", err=True)
        if result.get("accepted", 0) == 0:
            raise EmptyDatasetError("service rejected every sample")


@cli.command()
@click.option("--in", "in_path", type=str, required=True, help="Samples CSV.")
@click.option("--preset", "preset_names", type=str, multiple=True,
              help="Preset to apply (repeatable; replaces its kind's slot).")
@click.option("--out", "out_file", type=click.File("w"), default="-",
              help="Score CSV destination (default stdout).")
@click.option("--bounds", "bounds_mode", type=click.Choice(["global", "rolling"]),
              default="global", show_default=True,
              help="global: one bounds table from the whole file; "
                   "rolling: replay per-scenario ingestion windows.")
@click.option("--window", type=int, default=500, show_default=True,
              help="Rolling window size (rolling mode only).")
@click.option("--model", "model_path", type=str, default=None,
              help="Forest model for the ml columns (optional).")
@click.option("--config", "config_path", type=str, default=None)
def score(in_path: str, preset_names: tuple[str, ...], out_file, bounds_mode: str,
          window: int, model_path: str | None, config_path: str | None) -> None:
    """Score a CSV of samples and emit the score CSV."""
    config = _load_app_config(config_path)
    triple = _resolve_triple(config, preset_names)
    samples = import_csv_path(in_path)
    if not samples:
        raise EmptyDatasetError(f"no samples in {in_path}")
    model = None
    if model_path is not None:
        model = forest_mod.load_model(model_path)
    records = score_pipeline(
        samples, triple=triple, profiles=config.profile_catalog(), ms=config.ms,
        smoothing_lam=config.smoothing_lambda, bounds_mode=bounds_mode,
        window=window, model=model)
    export_scores_csv(records, out_file)
    click.echo(f"scored {len(records)} samples ({bounds_mode} bounds)", err=True)


@cli.command()
@click.option("--in", "in_path", type=str, required=True, help="Samples CSV.")
@click.option("--out", "out_path", type=str, required=True, help="Model JSON path.")
@click.option("--trees", type=int, default=100, show_default=True)
@click.option("--depth", type=int, default=12, show_default=True)
@click.option("--min-leaf", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--preset", "preset_names", type=str, multiple=True)
@click.option("--config", "config_path", type=str, default=None)
def train(in_path: str, out_path: str, trees: int, depth: int, min_leaf: int,
          seed: int, preset_names: tuple[str, ...], config_path: str | None) -> None:
    """Fit a forest on a sample file labeled by its analytic fusion scores."""
    config = _load_app_config(config_path)
    triple = _resolve_triple(config, preset_names)
    samples = import_csv_path(in_path)
    if not samples:
        raise EmptyDatasetError(f"no samples in {in_path}")
    model = forest_mod.train_fusion_model(
        samples, n_trees=trees, max_depth=depth, min_leaf_size=min_leaf,
        random_state=seed, triple=triple, ms=config.ms)
    forest_mod.save_model(model, out_path)
    X = forest_mod.feature_matrix(samples)
    y = forest_mod.fusion_labels(samples, triple=triple, ms=config.ms)
    mae = float(abs(model.predict(X) - y).mean())
    click.echo(f"trained {trees} trees on {len(samples)} samples "
               f"(in-sample mae {mae:.3f}) -> {out_path}")


@cli.command()
@click.option("--model", "model_path", type=str, required=True)
@click.option("--in", "in_path", type=str, required=True, help="Samples CSV.")
@click.option("--confidence", type=float, default=0.9, show_default=True)
@click.option("--preset", "preset_names", type=str, multiple=True)
@click.option("--config", "config_path", type=str, default=None)
def evaluate(model_path: str, in_path: str, confidence: float,
             preset_names: tuple[str, ...], config_path: str | None) -> None:
    """Compare a stored model against analytic fusion scores on a file."""
    config = _load_app_config(config_path)
    triple = _resolve_triple(config, preset_names)
    model = forest_mod.load_model(
        model_path, expected_features=forest_mod.FUSION_FEATURES)
    samples = import_csv_path(in_path)
    if not samples:
        raise EmptyDatasetError(f"no samples in {in_path}")
    X = forest_mod.feature_matrix(samples)
    y = forest_mod.fusion_labels(samples, triple=triple, ms=config.ms)
    predictions = model.predict(X)
    lo, hi = model.predict_interval(X, confidence)
    mae = float(abs(predictions - y).mean())
    coverage = float(((y >= lo) & (y <= hi)).mean())
    click.echo(json.dumps({
        "samples": len(samples),
        "mae": mae,
        "confidence": confidence,
        "coverage": coverage,
    }, indent=2))


@cli.command()
@click.option("--in", "in_path", type=str, required=True, help="Samples CSV.")
@click.option("--kind", type=click.Choice(["heatmap", "distribution", "scatter"]),
              required=True)
@click.option("--out", "out_file", type=click.File("w"), default="-")
@click.option("--preset", "preset_names", type=str, multiple=True)
@click.option("--config", "config_path", type=str, default=None)
def report(in_path: str, kind: str, out_file, preset_names: tuple[str, ...],
           config_path: str | None) -> None:
    """Render an offline JSON report from a sample file."""
    config = _load_app_config(config_path)
    triple = _resolve_triple(config, preset_names)
    samples = import_csv_path(in_path)
    if not samples:
        raise EmptyDatasetError(f"no samples in {in_path}")
    profiles = config.profile_catalog()
    if kind == "heatmap":
        view = heatmap_view(samples, triple, profiles, config.ms)
    else:
        records = score_pipeline(samples, triple=triple, profiles=profiles,
                                 ms=config.ms, bounds_mode="global")
        view = distribution_view(records) if kind == "distribution" else scatter_view(records)
    json.dump(view, out_file, indent=2)
    out_file.write("\n")


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.UsageError as exc:
        message = exc.format_message()
        if exc.ctx is not None:
            click.echo(exc.ctx.get_usage(), err=True)
        click.echo(f"error: {message}", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.Abort:
        click.echo("aborted", err=True)
        return 130
    except QersError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except (OSError, urllib.error.URLError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 3


if __name__ == "__main__":
    sys.exit(main())
