import json

import numpy as np
import pytest

from hgx.cli import build_parser, main


@pytest.fixture
def dataset_path(tmp_path):
    path = tmp_path / "data.json"
    code = main([
        "synth", "--out", str(path), "--nodes", "60", "--classes", "3",
        "--edges", "50", "--seed", "4",
    ])
    assert code == 0
    return path


def run(args):
    return main([str(a) for a in args])


class TestSynth:
    def test_writes_valid_dataset(self, dataset_path):
        from hgx.data import load_dataset

        ds = load_dataset(dataset_path)
        assert ds.num_nodes == 60
        assert ds.num_classes == 3

    def test_byte_identical_given_seed(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert run(["synth", "--out", a, "--seed", "9"]) == 0
        assert run(["synth", "--out", b, "--seed", "9"]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_bad_homophily_exit_2(self, tmp_path):
        assert run(["synth", "--out", tmp_path / "x.json", "--homophily", "1.2"]) == 2


class TestTrain:
    def test_writes_report_and_checkpoint(self, dataset_path, tmp_path, capsys):
        out = tmp_path / "run"
        code = run(["train", "--dataset", dataset_path, "--variant", "deep-hgcn",
                    "--layers", "3", "--epochs", "20", "--out-dir", out])
        assert code == 0
        assert (out / "report.json").exists()
        assert (out / "model.ckpt").exists()
        report = json.loads((out / "report.json").read_text())
        assert report["config"]["num_layers"] == 3
        assert "wall_clock_seconds" not in report
        summary = capsys.readouterr().out.strip().splitlines()[-1]
        assert summary.startswith("train variant=deep-hgcn layers=3")

    def test_deep_configuration(self, dataset_path, tmp_path):
        out = tmp_path / "deep"
        code = run(["train", "--dataset", dataset_path, "--variant", "deep-hgcn",
                    "--layers", "64", "--alpha", "0.1", "--lambda-id", "0.5",
                    "--epochs", "3", "--out-dir", out])
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        assert report["config"]["num_layers"] == 64
        assert report["config"]["alpha"] == 0.1
        assert report["config"]["lambda_id"] == 0.5

    def test_missing_dataset_exit_3(self, tmp_path, capsys):
        assert run(["train", "--dataset", tmp_path / "nope.json"]) == 3
        assert "error:" in capsys.readouterr().err

    def test_invalid_layers_exit_2(self, dataset_path, tmp_path, capsys):
        code = run(["train", "--dataset", dataset_path, "--layers", "0",
                    "--out-dir", tmp_path / "x"])
        assert code == 2
        assert "num_layers" in capsys.readouterr().err

    def test_deterministic_outputs(self, dataset_path, tmp_path):
        args = ["train", "--dataset", dataset_path, "--layers", "2",
                "--epochs", "15", "--seed", "12"]
        assert run(args + ["--out-dir", tmp_path / "r1"]) == 0
        assert run(args + ["--out-dir", tmp_path / "r2"]) == 0
        r1, r2 = tmp_path / "r1", tmp_path / "r2"
        assert (r1 / "report.json").read_bytes() == (r2 / "report.json").read_bytes()
        assert (r1 / "model.ckpt").read_bytes() == (r2 / "model.ckpt").read_bytes()

    def test_config_file_merging(self, dataset_path, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"layers": 3, "epochs": 5}))
        out = tmp_path / "merged"
        # flag --layers 2 beats the file's 3; the file's epochs=5 applies
        code = run(["train", "--dataset", dataset_path, "--config", cfg,
                    "--layers", "2", "--out-dir", out])
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        assert report["config"]["num_layers"] == 2
        assert report["config"]["epochs"] == 5
        assert len(report["epochs"]) <= 5

    def test_unknown_config_key_exit_2(self, dataset_path, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"layrs": 3}))
        code = run(["train", "--dataset", dataset_path, "--config", cfg,
                    "--out-dir", tmp_path / "x"])
        assert code == 2
        assert "layrs" in capsys.readouterr().err

    def test_precision_env_override(self, dataset_path, tmp_path, monkeypatch):
        out = tmp_path / "p32"
        monkeypatch.setenv("HGX_PRECISION", "32")
        assert run(["train", "--dataset", dataset_path, "--epochs", "3",
                    "--out-dir", out]) == 0
        report = json.loads((out / "report.json").read_text())
        assert report["config"]["precision"] == 32

    def test_invalid_precision_env_exit_2(self, dataset_path, tmp_path, monkeypatch):
        monkeypatch.setenv("HGX_PRECISION", "48")
        assert run(["train", "--dataset", dataset_path,
                    "--out-dir", tmp_path / "x"]) == 2


class TestSweep:
    def test_row_count(self, dataset_path, tmp_path):
        out = tmp_path / "sweep"
        code = run(["sweep", "--dataset", dataset_path, "--depths", "2,3",
                    "--splits", "3", "--epochs", "8", "--out-dir", out])
        assert code == 0
        lines = (out / "sweep.csv").read_text().strip().splitlines()
        assert len(lines) == 1 + 6

    def test_default_depths_match_standard_grid(self):
        parser = build_parser()
        args = parser.parse_args(["sweep", "--dataset", "x.json"])
        assert args.depths == "2,4,8,16,32,64"

    def test_deterministic_csv(self, dataset_path, tmp_path):
        args = ["sweep", "--dataset", dataset_path, "--depths", "2",
                "--splits", "2", "--epochs", "6", "--seed", "3"]
        assert run(args + ["--out-dir", tmp_path / "s1"]) == 0
        assert run(args + ["--out-dir", tmp_path / "s2"]) == 0
        assert (tmp_path / "s1" / "sweep.csv").read_bytes() == \
            (tmp_path / "s2" / "sweep.csv").read_bytes()

    def test_parallel_jobs_same_rows(self, dataset_path, tmp_path):
        base = ["sweep", "--dataset", dataset_path, "--depths", "1,2",
                "--splits", "2", "--epochs", "6", "--seed", "3"]
        assert run(base + ["--out-dir", tmp_path / "j1"]) == 0
        assert run(base + ["--jobs", "2", "--out-dir", tmp_path / "j2"]) == 0
        assert (tmp_path / "j1" / "sweep.csv").read_bytes() == \
            (tmp_path / "j2" / "sweep.csv").read_bytes()

    def test_bad_depths_exit_2(self, dataset_path, tmp_path):
        assert run(["sweep", "--dataset", dataset_path, "--depths", "2,zero",
                    "--out-dir", tmp_path / "x"]) == 2


class TestAnalyze:
    def test_stationary_sums_to_one(self, dataset_path, tmp_path):
        out = tmp_path / "an"
        code = run(["analyze", "--dataset", dataset_path, "--layers", "3",
                    "--out-dir", out])
        assert code == 0
        doc = json.loads((out / "analyze.json").read_text())
        assert doc["connected"] is True
        assert np.sum(doc["stationary_transition"]) == pytest.approx(1.0, abs=1e-12)
        assert doc["min_nonzero_eigenvalue"] > 0.0

    def test_eigen_cap_skip(self, dataset_path, tmp_path):
        out = tmp_path / "an2"
        code = run(["analyze", "--dataset", dataset_path, "--eigen-cap", "10",
                    "--out-dir", out])
        assert code == 0
        doc = json.loads((out / "analyze.json").read_text())
        assert doc["min_nonzero_eigenvalue"] is None
        assert "exceeds cap 10" in doc["eigen_skipped"]

    def test_trace_rows_per_layer(self, dataset_path, tmp_path):
        out = tmp_path / "an3"
        assert run(["analyze", "--dataset", dataset_path, "--layers", "4",
                    "--out-dir", out]) == 0
        lines = (out / "energy_trace.csv").read_text().strip().splitlines()
        assert lines[0] == "layer,dirichlet_energy,distance_to_stationary"
        assert len(lines) == 1 + 5

    def test_checkpoint_source(self, dataset_path, tmp_path):
        run_dir = tmp_path / "trained"
        assert run(["train", "--dataset", dataset_path, "--variant", "hgnn",
                    "--layers", "2", "--epochs", "5", "--out-dir", run_dir]) == 0
        out = tmp_path / "an4"
        code = run(["analyze", "--dataset", dataset_path, "--checkpoint",
                    run_dir / "model.ckpt", "--out-dir", out])
        assert code == 0
        doc = json.loads((out / "analyze.json").read_text())
        assert doc["params_source"].endswith("model.ckpt")
        lines = (out / "energy_trace.csv").read_text().strip().splitlines()
        assert len(lines) == 1 + 3


class TestVerify:
    def test_passes_and_prints_each_check(self, tmp_path, capsys):
        code = run(["verify", "--trials", "3", "--seed", "7",
                    "--out-dir", tmp_path / "v"])
        assert code == 0
        out_lines = [l for l in capsys.readouterr().out.splitlines() if l]
        passes = [l for l in out_lines if l.startswith("PASS")]
        assert len(passes) == 7

    def test_reproducible_report(self, tmp_path):
        args = ["verify", "--trials", "3", "--seed", "7"]
        assert run(args + ["--out-dir", tmp_path / "v1"]) == 0
        assert run(args + ["--out-dir", tmp_path / "v2"]) == 0
        assert (tmp_path / "v1" / "verify.json").read_bytes() == \
            (tmp_path / "v2" / "verify.json").read_bytes()

    def test_corruption_negative_control(self, tmp_path, capsys):
        code = run(["verify", "--trials", "2", "--self-test-corrupt",
                    "--out-dir", tmp_path / "vbad"])
        assert code == 4
        captured = capsys.readouterr()
        assert "FAIL" in captured.out
        assert "check(s) failed" in captured.err
