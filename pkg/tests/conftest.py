"""Shared fixtures and sample builders."""

from __future__ import annotations

import pytest

from qers.model import Algorithm, MetricSample, Scenario


def make_sample(
    ts_ms: int = 1_700_000_000_000,
    device_id: str = "dev-00",
    algorithm: Algorithm = Algorithm.KYBER,
    scenario: Scenario = Scenario.NEAR,
    latency_ms: float = 50.0,
    jitter_ms: float = 5.0,
    packet_loss_pct: float = 1.0,
    overhead_ms: float = 40.0,
    cpu_pct: float = 30.0,
    rssi_dbm: float = -50.0,
    energy_mj: float = 12.0,
    key_bytes: int = 1000,
) -> MetricSample:
    return MetricSample(
        ts_ms=ts_ms,
        device_id=device_id,
        algorithm=algorithm,
        scenario=scenario,
        latency_ms=latency_ms,
        jitter_ms=jitter_ms,
        packet_loss_pct=packet_loss_pct,
        overhead_ms=overhead_ms,
        cpu_pct=cpu_pct,
        rssi_dbm=rssi_dbm,
        energy_mj=energy_mj,
        key_bytes=key_bytes,
    )


def fleet(devices: int = 2, samples_per_device: int = 100, seed: int = 0,
          **overrides) -> list[MetricSample]:
    """Simulated dataset shared by forest, service and acceptance tests."""
    from qers.simulator import FleetConfig, run_fleet

    return run_fleet(FleetConfig(
        devices=devices, samples_per_device=samples_per_device,
        seed=seed, **overrides))


@pytest.fixture
def sample() -> MetricSample:
    return make_sample()


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance: end-to-end acceptance criteria")


def pytest_terminal_summary(terminalreporter):
    """One pass/fail line per acceptance criterion."""
    lines = []
    for outcome in ("passed", "failed"):
        for report in terminalreporter.stats.get(outcome, []):
            if "acceptance" not in report.keywords:
                continue
            name = report.nodeid.rsplit("::", 1)[-1]
            lines.append((name, outcome == "passed"))
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok in sorted(lines):
        terminalreporter.write_line(
            ("[PASS] " if ok else "[FAIL] ") + name)
