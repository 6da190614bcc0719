"""Command line: subcommands, wiring, and the exit code contract.

Commands run in-process through main(argv) so exit codes and output are
observable without spawning a shell.
"""

from __future__ import annotations

import io
import json
import socket

import pytest

from qers.cli import main
from qers.forest import FUSION_FEATURES, load_model
from qers.model import Algorithm
from qers.store import export_csv_path, import_csv_path, import_scores_csv

from conftest import make_sample


def run(capsys, *argv: str) -> tuple[int, str, str]:
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture()
def sample_file(tmp_path) -> str:
    path = str(tmp_path / "run.csv")
    code = main(["simulate", "--devices", "2", "--samples", "40",
                 "--seed", "7", "--out", path])
    assert code == 0
    return path


class TestSimulate:
    def test_writes_expected_row_count(self, capsys, tmp_path):
        path = str(tmp_path / "sim.csv")
        code, _out, err = run(capsys, "simulate", "--devices", "2",
                              "--samples", "50", "--out", path)
        assert code == 0
        assert "wrote 200 samples" in err
        assert len(import_csv_path(path)) == 200  # 2 devices x 50 x 2 scenarios

    def test_deterministic_across_invocations(self, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        for path in (a, b):
            assert main(["simulate", "--devices", "1", "--samples", "30",
                         "--seed", "3", "--out", str(path)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_single_scenario(self, capsys, tmp_path):
        path = str(tmp_path / "near.csv")
        code, _out, _err = run(capsys, "simulate", "--devices", "2",
                               "--samples", "25", "--scenario", "near",
                               "--out", path)
        assert code == 0
        samples = import_csv_path(path)
        assert len(samples) == 50
        assert {s.scenario.value for s in samples} == {"near"}

    def test_algorithm_subset(self, capsys, tmp_path):
        path = str(tmp_path / "two.csv")
        code, _, _ = run(capsys, "simulate", "--devices", "1", "--samples",
                         "10", "--algorithms", "ntru,falcon", "--out", path)
        assert code == 0
        assert {s.algorithm for s in import_csv_path(path)} == {
            Algorithm.NTRU, Algorithm.FALCON}

    def test_requires_destination(self, capsys):
        code, _out, err = run(capsys, "simulate")
        assert code == 1
        assert "--out" in err

    def test_unknown_algorithm_is_usage_error(self, capsys, tmp_path):
        code, _out, err = run(capsys, "simulate", "--algorithms", "rsa",
                              "--out", str(tmp_path / "x.csv"))
        assert code == 1
        assert "rsa" in err

    def test_unreachable_push_target_is_io_error(self, capsys):
        with socket.socket() as sock:
            sock.bind(("127.0.0.1", 0))
            port = sock.getsockname()[1]
        # nothing listens on the probed port any more
        code, _out, err = run(capsys, "simulate", "--devices", "1",
                              "--samples", "2",
                              "--push", f"http://127.0.0.1:{port}")
        assert code == 3
        assert "error" in err


class TestScore:
    def test_scores_to_stdout(self, capsys, sample_file):
        code, out, err = run(capsys, "score", "--in", sample_file)
        assert code == 0
        assert "scored 160 samples" in err
        records = import_scores_csv(io.StringIO(out))
        assert len(records) == 160
        assert all(r.preset_name == "Basic-B+Tuned-B+Fusion-default"
                   for r in records)

    def test_known_norms_fixture(self, capsys, tmp_path):
        path = str(tmp_path / "pair.csv")
        export_csv_path([
            make_sample(latency_ms=10.0, overhead_ms=10.0, packet_loss_pct=0.0),
            make_sample(ts_ms=1_700_000_000_001, latency_ms=110.0,
                        overhead_ms=110.0, packet_loss_pct=10.0),
        ], path)
        code, out, _err = run(capsys, "score", "--in", path,
                              "--preset", "Basic-RT")
        assert code == 0
        records = import_scores_csv(io.StringIO(out))
        # second row maxes every basic cost: 100 - (0.55+0.20+0.15)*100
        assert records[1].basic == pytest.approx(10.0, abs=1e-9)
        assert records[0].basic == pytest.approx(100.0, abs=1e-9)

    def test_rolling_bounds_differ_from_global(self, capsys, sample_file):
        code, global_out, _ = run(capsys, "score", "--in", sample_file)
        assert code == 0
        code, rolling_out, _ = run(capsys, "score", "--in", sample_file,
                                   "--bounds", "rolling")
        assert code == 0
        assert global_out != rolling_out

    def test_out_file(self, capsys, sample_file, tmp_path):
        out_path = str(tmp_path / "scores.csv")
        code, _out, _err = run(capsys, "score", "--in", sample_file,
                               "--out", out_path)
        assert code == 0
        with open(out_path) as fh:
            assert len(import_scores_csv(fh)) == 160

    def test_unknown_preset_lists_catalog(self, capsys, sample_file):
        code, _out, err = run(capsys, "score", "--in", sample_file,
                              "--preset", "Basic-X")
        assert code == 1
        assert "Basic-X" in err and "Basic-RT" in err

    def test_missing_input_is_io_error(self, capsys, tmp_path):
        code, _out, err = run(capsys, "score", "--in",
                              str(tmp_path / "absent.csv"))
        assert code == 3
        assert "error" in err

    def test_header_only_input_is_data_error(self, capsys, tmp_path):
        path = str(tmp_path / "empty.csv")
        export_csv_path([], path)
        code, _out, err = run(capsys, "score", "--in", path)
        assert code == 2
        assert "no samples" in err

    def test_corrupt_row_is_data_error(self, capsys, tmp_path):
        path = tmp_path / "bad.csv"
        export_csv_path([make_sample()], str(path))
        path.write_text(path.read_text().replace("kyber", "xor"))
        code, _out, err = run(capsys, "score", "--in", str(path))
        assert code == 2
        assert "xor" in err


class TestTrainEvaluate:
    def test_train_then_evaluate(self, capsys, sample_file, tmp_path):
        model_path = str(tmp_path / "model.json")
        code, out, _err = run(capsys, "train", "--in", sample_file,
                              "--out", model_path, "--trees", "20",
                              "--seed", "5")
        assert code == 0
        assert "trained 20 trees on 160 samples" in out
        model = load_model(model_path, expected_features=FUSION_FEATURES)
        assert len(model.estimators_) == 20

        code, out, _err = run(capsys, "evaluate", "--model", model_path,
                              "--in", sample_file)
        assert code == 0
        result = json.loads(out)
        assert result["samples"] == 160
        assert result["mae"] < 3.0  # in-sample on the training file
        assert result["coverage"] >= 0.85
        assert result["confidence"] == 0.9

    def test_scoring_with_model_fills_ml_columns(self, capsys, sample_file,
                                                 tmp_path):
        model_path = str(tmp_path / "model.json")
        assert main(["train", "--in", sample_file, "--out", model_path,
                     "--trees", "10"]) == 0
        capsys.readouterr()
        code, out, _err = run(capsys, "score", "--in", sample_file,
                              "--model", model_path)
        assert code == 0
        records = import_scores_csv(io.StringIO(out))
        assert any(r.ml_fusion != r.fusion for r in records)
        assert all(r.ml_lo <= r.ml_hi for r in records)

    def test_feature_order_mismatch_is_data_error(self, capsys, sample_file,
                                                  tmp_path):
        model_path = tmp_path / "model.json"
        assert main(["train", "--in", sample_file, "--out",
                     str(model_path), "--trees", "5"]) == 0
        capsys.readouterr()
        data = json.loads(model_path.read_text())
        data["feature_names"] = list(reversed(data["feature_names"]))
        model_path.write_text(json.dumps(data))
        code, _out, err = run(capsys, "evaluate", "--model", str(model_path),
                              "--in", sample_file)
        assert code == 2
        assert "feature" in err

    def test_garbage_model_is_data_error(self, capsys, sample_file, tmp_path):
        model_path = tmp_path / "model.json"
        model_path.write_text("]]]")
        code, _out, err = run(capsys, "evaluate", "--model", str(model_path),
                              "--in", sample_file)
        assert code == 2
        assert "JSON" in err


class TestReport:
    @pytest.mark.parametrize("kind", ["heatmap", "distribution", "scatter"])
    def test_kinds_emit_json(self, capsys, sample_file, kind):
        code, out, _err = run(capsys, "report", "--in", sample_file,
                              "--kind", kind)
        assert code == 0
        view = json.loads(out)
        assert view["rows"]

    def test_heatmap_shape(self, capsys, sample_file):
        code, out, _err = run(capsys, "report", "--in", sample_file,
                              "--kind", "heatmap")
        assert code == 0
        view = json.loads(out)
        assert view["ms"] == 100.0
        assert len(view["rows"]) == 5
        for row in view["rows"]:
            assert set(row["normalized_means"]) == set(view["criteria"])

    def test_unknown_kind_is_usage_error(self, capsys, sample_file):
        code, _out, _err = run(capsys, "report", "--in", sample_file,
                               "--kind", "pie")
        assert code == 1

    def test_config_rescales_scores(self, capsys, sample_file, tmp_path):
        config_path = tmp_path / "small.json"
        config_path.write_text(json.dumps({"ms": 10.0}))
        code, out, _err = run(capsys, "report", "--in", sample_file,
                              "--kind", "distribution",
                              "--config", str(config_path))
        assert code == 0
        rows = json.loads(out)["rows"]
        assert all(row["max"] <= 10.0 for row in rows)


class TestServe:
    def test_busy_port_is_io_error(self, capsys, tmp_path):
        with socket.socket() as sock:
            sock.bind(("127.0.0.1", 0))
            port = sock.getsockname()[1]
            code, _out, err = run(
                capsys, "serve", "--bind", f"127.0.0.1:{port}",
                "--store", str(tmp_path / "s.csv"))
        assert code == 3
        assert "cannot bind" in err

    def test_missing_config_is_io_error(self, capsys, tmp_path):
        code, _out, err = run(capsys, "serve", "--config",
                              str(tmp_path / "absent.json"))
        assert code == 3
        assert "error" in err

    def test_malformed_bind_is_data_error(self, capsys, tmp_path):
        code, _out, err = run(capsys, "serve", "--bind", "nocolon",
                              "--store", str(tmp_path / "s.csv"))
        assert code == 2
        assert "host:port" in err


class TestHelp:
    def test_group_lists_subcommands(self, capsys):
        code, out, _err = run(capsys, "--help")
        assert code == 0
        for name in ("serve", "simulate", "score", "train", "evaluate",
                     "report"):
            assert name in out
