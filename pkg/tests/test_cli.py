import json
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from wsqa.cli import main
from wsqa.cnn.model import init_model
from wsqa.cnn.serialize import save_model_file
from wsqa.dataset import DatasetManifest
from wsqa.metrics import MetricsReport
from wsqa.scans import read_image_pgm, read_scan_pgm

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def workspace(tmp_path_factory, runner):
    """A tiny generated corpus plus split manifest shared by the CLI tests."""
    root = tmp_path_factory.mktemp("cli")
    result = runner.invoke(main, [
        "generate", "--seed", "9", "--out", str(root / "scans"),
        "--faultless", "6", "--erroneous", "6",
        "--width", "320", "--height", "40",
    ])
    assert result.exit_code == 0, result.output
    result = runner.invoke(main, [
        "split", "--truth", str(root / "scans" / "truth.csv"),
        "--out", str(root / "manifest.csv"), "--seed", "4",
        "--val-per-class", "2", "--test-per-class", "2",
    ])
    assert result.exit_code == 0, result.output
    return root


class TestGenerate:
    def test_writes_scans_and_truth(self, workspace):
        scans = sorted((workspace / "scans").glob("*.pgm"))
        assert len(scans) == 12
        truth = (workspace / "scans" / "truth.csv").read_text().splitlines()
        assert truth[0] == "scan_id,verdict,defects,seed"
        assert len(truth) == 13
        # labels match defect-injection ground truth
        for line in truth[1:]:
            scan_id, verdict, defects, seed = line.split(",")
            assert (verdict == "Erroneous") == bool(defects)
        scan = read_scan_pgm(scans[0].read_bytes(), scan_id=scans[0].stem)
        assert (scan.width, scan.height) == (320, 40)

    def test_deterministic_rerun(self, workspace, runner, tmp_path):
        result = runner.invoke(main, [
            "generate", "--seed", "9", "--out", str(tmp_path / "again"),
            "--faultless", "6", "--erroneous", "6",
            "--width", "320", "--height", "40",
        ])
        assert result.exit_code == 0
        for path in sorted((tmp_path / "again").glob("*")):
            original = workspace / "scans" / path.name
            assert path.read_bytes() == original.read_bytes(), path.name

    def test_requires_counts(self, runner, tmp_path):
        result = runner.invoke(main, ["generate", "--seed", "1", "--out", str(tmp_path)])
        assert result.exit_code != 0
        assert "nothing to generate" in result.output


class TestPreprocessCli:
    def test_emits_images_and_sidecars(self, workspace, runner):
        out = workspace / "proc_shrink"
        result = runner.invoke(main, [
            "preprocess", "--scans", str(workspace / "scans"),
            "--out", str(out), "--mode", "shrink",
        ])
        assert result.exit_code == 0, result.output
        images = sorted(out.glob("*.pgm"))
        assert len(images) == 12
        img = read_image_pgm(images[0].read_bytes())
        assert img.pixels.shape == (299, 299)
        sidecar = json.loads(images[0].with_suffix(".json").read_text())
        assert sidecar["mode"] == "shrink" and sidecar["gamma"] == 0.7
        assert sidecar["source_scan_id"] == images[0].stem


class TestSplitCli:
    def test_split_manifest_shape(self, workspace):
        manifest = DatasetManifest.from_csv((workspace / "manifest.csv").read_text())
        assert len(manifest.entries) == 48
        assert manifest.seed == 4

    def test_split_deterministic(self, workspace, runner, tmp_path):
        out = tmp_path / "again.csv"
        result = runner.invoke(main, [
            "split", "--truth", str(workspace / "scans" / "truth.csv"),
            "--out", str(out), "--seed", "4",
            "--val-per-class", "2", "--test-per-class", "2",
        ])
        assert result.exit_code == 0
        assert out.read_text() == (workspace / "manifest.csv").read_text()

    def test_insufficient_corpus_fails(self, workspace, runner, tmp_path):
        result = runner.invoke(main, [
            "split", "--truth", str(workspace / "scans" / "truth.csv"),
            "--out", str(tmp_path / "m.csv"), "--seed", "1",
            "--val-per-class", "4", "--test-per-class", "4",
        ])
        assert result.exit_code != 0


@pytest.fixture(scope="module")
def trained(workspace, runner):
    out = workspace / "runs_shrink"
    result = runner.invoke(main, [
        "train", "--manifest", str(workspace / "manifest.csv"),
        "--scans", str(workspace / "scans"), "--mode", "shrink",
        "--out", str(out), "--runs", "2", "--epochs", "2",
        "--seed", "3", "--quiet",
    ])
    assert result.exit_code == 0, result.output
    return out


class TestTrainEvalCompare:
    def test_train_artifacts(self, trained):
        for run in ("run1", "run2"):
            assert (trained / run / "model_final.wsqa").exists()
            assert (trained / run / "model_best.wsqa").exists()
            trace = (trained / run / "trace.csv").read_text().splitlines()
            assert trace[0] == "epoch,train_acc,train_loss,val_acc,val_loss"
            assert len(trace) == 3
        summary = json.loads((trained / "summary.json").read_text())
        assert len(summary["runs"]) == 2
        assert summary["runs"][0]["seed"] != summary["runs"][1]["seed"]
        timing = json.loads((trained / "timing.json").read_text())
        assert timing["total_seconds"] > 0

    def test_train_determinism(self, workspace, runner, trained, tmp_path):
        again = tmp_path / "runs_again"
        result = runner.invoke(main, [
            "train", "--manifest", str(workspace / "manifest.csv"),
            "--scans", str(workspace / "scans"), "--mode", "shrink",
            "--out", str(again), "--runs", "1", "--epochs", "2",
            "--seed", "3", "--quiet",
        ])
        assert result.exit_code == 0, result.output
        for name in ("model_final.wsqa", "model_best.wsqa", "trace.csv"):
            assert (again / "run1" / name).read_bytes() == (trained / "run1" / name).read_bytes()

    def test_eval_reports(self, workspace, runner, trained):
        out = workspace / "eval_shrink.json"
        result = runner.invoke(main, [
            "eval", "--manifest", str(workspace / "manifest.csv"),
            "--scans", str(workspace / "scans"), "--mode", "shrink",
            "--run-dir", str(trained), "--out", str(out),
        ])
        assert result.exit_code == 0, result.output
        payload = json.loads(out.read_text())
        assert payload["checkpoint"] == "best"
        assert len(payload["runs"]) == 2
        # aggregate may be null when a barely-trained run leaves a
        # metric undefined; per-run reports are always present
        for report in payload["runs"]:
            parsed = MetricsReport.from_json_dict(report)
            assert 0.0 <= parsed.accuracy <= 1.0

    def test_eval_all_faultless_scores_half_on_balanced_split(self, workspace, runner, tmp_path):
        # a head biased hard toward Faultless calls every scan Faultless,
        # which scores exactly 50% on the balanced test split
        model = init_model(1)
        for layer in model.layers:
            for p in layer.params:
                p[...] = 0.0
        model.layers[-1].b[...] = [30.0, -30.0]
        path = tmp_path / "all_faultless.wsqa"
        save_model_file(model, path)
        result = runner.invoke(main, [
            "eval", "--manifest", str(workspace / "manifest.csv"),
            "--scans", str(workspace / "scans"), "--mode", "shrink",
            "--model", str(path),
        ])
        assert result.exit_code == 0, result.output
        assert "accuracy: 50.00%" in result.output

    def test_compare_against_fixture(self, workspace, runner, trained):
        scaled_eval = workspace / "eval_scale.json"
        result = runner.invoke(main, [
            "eval", "--manifest", str(workspace / "manifest.csv"),
            "--scans", str(workspace / "scans"), "--mode", "scale",
            "--run-dir", str(trained), "--out", str(scaled_eval),
        ])
        assert result.exit_code == 0, result.output
        result = runner.invoke(main, [
            "compare", "--shrunk", str(workspace / "eval_shrink.json"),
            "--scaled", str(scaled_eval),
        ])
        assert result.exit_code == 0, result.output
        assert "96.88%" in result.output  # reference column from the fixture
        assert "Reference system" in result.output

    def test_compare_missing_reference_column(self, workspace, runner):
        result = runner.invoke(main, [
            "compare", "--shrunk", str(workspace / "eval_shrink.json"),
            "--scaled", str(workspace / "eval_shrink.json"),
            "--reference", str(workspace / "absent.json"),
        ])
        assert result.exit_code == 0, result.output
        assert "unavailable" in result.output


class TestBenchCli:
    def test_bench_report(self, workspace, runner, tmp_path):
        model_path = tmp_path / "m.wsqa"
        save_model_file(init_model(2), model_path)
        result = runner.invoke(main, [
            "bench", "--model", str(model_path),
            "--scans", str(workspace / "scans"), "-n", "5",
        ])
        assert result.exit_code == 0, result.output
        report = json.loads(result.output[result.output.index("{"):result.output.rindex("}") + 1])
        assert report["samples"] == 5
        assert 0 < report["classify_ms"]["median"] <= report["classify_ms"]["p99"]

    def test_bench_rejects_zero_samples(self, workspace, runner, tmp_path):
        model_path = tmp_path / "m2.wsqa"
        save_model_file(init_model(2), model_path)
        result = runner.invoke(main, [
            "bench", "--model", str(model_path),
            "--scans", str(workspace / "scans"), "-n", "0",
        ])
        assert result.exit_code != 0
