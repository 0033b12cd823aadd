"""Command-line shell over the inspection pipeline.

Subcommands compose the library modules: generate synthetic corpora,
preprocess scans, build split manifests, train and evaluate the
classifier, compare resize strategies against a reference baseline,
serve the HTTP API, and benchmark inference latency.

WSQA_DATA_DIR, when set, is the default parent for relative data paths.
"""

from __future__ import annotations

import csv
import json
import os
import time
from pathlib import Path

import click

from . import synth
from .bench import bench as run_bench
from .cnn.serialize import load_model_file, save_model_file
from .cnn.train import (
    InMemoryImageStore,
    TrainConfig,
    FINETUNE_LEARNING_RATE,
    predict_items,
    run_seed,
    train as train_model,
)
from .dataset import DatasetManifest, split as split_corpus, verify_manifest
from .labels import DEFAULT_QUORUM, LabelStore
from .metrics import (
    MetricsReport,
    aggregate_runs,
    comparison_table,
    confusion,
    load_reference_file,
    load_reference_fixture,
    metrics as compute_metrics,
    report_text,
)
from .preprocess import DEFAULT_GAMMA, PreprocessConfig, to_network_input
from .scans import (
    ResizeMode,
    Verdict,
    read_scan_pgm,
    write_image_pgm,
    write_scan_pgm,
)


def _data_dir() -> Path:
    return Path(os.environ.get("WSQA_DATA_DIR", "."))


def _resolve(path: str | Path) -> Path:
    path = Path(path)
    return path if path.is_absolute() else _data_dir() / path


def _read_truth(path: Path) -> list[tuple[str, Verdict]]:
    corpus = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            corpus.append((row["scan_id"], Verdict.parse(row["verdict"])))
    return corpus


def _load_store(scans_dir: Path, scan_ids, cfg: PreprocessConfig) -> InMemoryImageStore:
    """Preprocess the referenced raw scans, one at a time, into memory."""
    images = {}
    for scan_id in sorted(set(scan_ids)):
        path = scans_dir / f"{scan_id}.pgm"
        if not path.exists():
            raise click.ClickException(f"missing scan file {path}")
        scan = read_scan_pgm(path.read_bytes(), scan_id=scan_id)
        images[scan_id] = to_network_input(scan, cfg).pixels
    return InMemoryImageStore(images)


def _parse_defect_mix(text: str | None) -> dict[str, float]:
    if not text:
        return {kind: 1.0 for kind in synth.DEFECT_KINDS}
    mix = {}
    for part in text.split(","):
        kind, _, weight = part.partition("=")
        mix[kind.strip()] = float(weight) if weight else 1.0
    return mix


@click.group()
def main():
    """Weld-seam quality assurance toolkit."""


# -- generate -----------------------------------------------------------------


@main.command()
@click.option("--seed", type=int, required=True, help="Corpus seed; output is a pure function of it.")
@click.option("--out", "out_dir", default="scans", show_default=True)
@click.option("--paper-corpus", is_flag=True,
              help="553 faultless + 63 erroneous scans (the standard reference corpus).")
@click.option("--faultless", type=int, default=0)
@click.option("--erroneous", type=int, default=0)
@click.option("--width", type=int, default=synth.DEFAULT_WIDTH, show_default=True)
@click.option("--height", type=int, default=synth.DEFAULT_HEIGHT, show_default=True)
@click.option("--defect-mix", default=None,
              help="Comma list like 'pore=1,interruption=2'; default is all four kinds, equal weight.")
@click.option("--no-displacement", is_flag=True, help="Disable vertical band displacement.")
@click.option("--no-gain-shift", is_flag=True, help="Disable per-scan gain shift.")
@click.option("--noise-sigma", type=float, default=synth.DEFAULT_NOISE_SIGMA, show_default=True)
def generate(seed, out_dir, paper_corpus, faultless, erroneous, width, height,
             defect_mix, no_displacement, no_gain_shift, noise_sigma):
    """Write synthetic scans plus the ground-truth manifest."""
    if paper_corpus:
        faultless, erroneous = synth.REFERENCE_FAULTLESS, synth.REFERENCE_ERRONEOUS
    if faultless + erroneous == 0:
        raise click.ClickException("nothing to generate: pass --paper-corpus or counts")
    try:
        cfg = synth.GenConfig(
            seed=seed, width=width, height=height,
            n_faultless=faultless, n_erroneous=erroneous,
            defect_mix=_parse_defect_mix(defect_mix),
            vertical_displacement=not no_displacement,
            gain_shift=not no_gain_shift,
            additive_noise_sigma=noise_sigma,
        )
    except ValueError as exc:
        raise click.ClickException(str(exc))

    out = _resolve(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = synth.generate_records(cfg)
    with open(out / "truth.csv", "w", newline="", encoding="utf-8") as truth_fh, \
         open(out / "seam_types.csv", "w", newline="", encoding="utf-8") as seam_fh:
        truth = csv.writer(truth_fh)
        truth.writerow(["scan_id", "verdict", "defects", "seed"])
        seams = csv.writer(seam_fh)
        seams.writerow(["scan_id", "seam_type"])
        for rec in records:
            (out / f"{rec.scan.id}.pgm").write_bytes(write_scan_pgm(rec.scan))
            truth.writerow([rec.scan.id, rec.verdict.value, "+".join(rec.defects), seed])
            seams.writerow([rec.scan.id, rec.scan.seam_type])
    n_err = sum(1 for r in records if r.verdict is Verdict.ERRONEOUS)
    click.echo(f"wrote {len(records)} scans ({len(records) - n_err} faultless, "
               f"{n_err} erroneous) to {out}")


# -- preprocess ----------------------------------------------------------------


@main.command()
@click.option("--scans", "scans_dir", default="scans", show_default=True)
@click.option("--out", "out_dir", required=True)
@click.option("--mode", type=click.Choice(["shrink", "scale"]), required=True)
@click.option("--gamma", type=float, default=DEFAULT_GAMMA, show_default=True)
@click.option("--pad-value", type=int, default=0, show_default=True)
def preprocess(scans_dir, out_dir, mode, gamma, pad_value):
    """Preprocess raw scans into 299x299 8-bit PGMs with sidecars."""
    scans_path = _resolve(scans_dir)
    out = _resolve(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        cfg = PreprocessConfig(gamma=gamma, mode=ResizeMode.parse(mode), pad_value=pad_value)
    except ValueError as exc:
        raise click.ClickException(str(exc))
    files = sorted(scans_path.glob("*.pgm"))
    if not files:
        raise click.ClickException(f"no .pgm scans under {scans_path}")
    for path in files:
        scan = read_scan_pgm(path.read_bytes(), scan_id=path.stem)
        img = to_network_input(scan, cfg)
        (out / f"{scan.id}.pgm").write_bytes(write_image_pgm(img))
        sidecar = {"source_scan_id": scan.id, "mode": mode, "gamma": gamma}
        (out / f"{scan.id}.json").write_text(json.dumps(sidecar, sort_keys=True) + "\n")
    click.echo(f"preprocessed {len(files)} scans ({mode}) into {out}")


# -- split ---------------------------------------------------------------------


@main.command("split")
@click.option("--truth", "truth_path", default="scans/truth.csv", show_default=True)
@click.option("--out", "out_path", default="manifest.csv", show_default=True)
@click.option("--seed", type=int, required=True)
@click.option("--val-per-class", type=int, default=16, show_default=True)
@click.option("--test-per-class", type=int, default=16, show_default=True)
def split_cmd(truth_path, out_path, seed, val_per_class, test_per_class):
    """Build the augmented train/validation/test manifest."""
    corpus = _read_truth(_resolve(truth_path))
    try:
        manifest = split_corpus(corpus, val_per_class, test_per_class, seed)
    except ValueError as exc:
        raise click.ClickException(str(exc))
    violations = verify_manifest(manifest)
    out = _resolve(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(manifest.to_csv(), encoding="utf-8")
    counts = manifest.counts()
    for name in ("train", "validation", "test"):
        c = counts[name]
        click.echo(f"{name:>10}: {c[Verdict.FAULTLESS]} faultless / {c[Verdict.ERRONEOUS]} erroneous")
    if violations:
        for v in violations:
            click.echo(f"violation: {v}", err=True)
        raise click.ClickException(f"manifest written to {out} but has {len(violations)} violations")
    click.echo(f"manifest OK: {out}")


# -- train ---------------------------------------------------------------------


@main.command()
@click.option("--manifest", "manifest_path", default="manifest.csv", show_default=True)
@click.option("--scans", "scans_dir", default="scans", show_default=True)
@click.option("--mode", type=click.Choice(["shrink", "scale"]), required=True)
@click.option("--out", "out_dir", required=True)
@click.option("--runs", type=int, default=3, show_default=True)
@click.option("--epochs", type=int, default=30, show_default=True,
              help="Desk default; the fine-tuning preset uses 150.")
@click.option("--lr", type=float, default=1e-2, show_default=True)
@click.option("--paper-lr", is_flag=True,
              help=f"Use the fine-tuning preset rate {FINETUNE_LEARNING_RATE} instead of --lr.")
@click.option("--batch-size", type=int, default=16, show_default=True)
@click.option("--class-weight", type=click.Choice(["none", "balanced"]), default="none",
              show_default=True, help="Reweight the loss against the class imbalance.")
@click.option("--seed", type=int, required=True)
@click.option("--gamma", type=float, default=DEFAULT_GAMMA, show_default=True)
@click.option("--quiet", is_flag=True)
def train(manifest_path, scans_dir, mode, out_dir, runs, epochs, lr, paper_lr,
          batch_size, class_weight, seed, gamma, quiet):
    """Train `--runs` independently seeded models on a manifest."""
    manifest = DatasetManifest.from_csv(_resolve(manifest_path).read_text(encoding="utf-8"))
    cfg_pre = PreprocessConfig(gamma=gamma, mode=ResizeMode.parse(mode))
    scan_ids = {e.scan_id for e in manifest.entries}
    store = _load_store(_resolve(scans_dir), scan_ids, cfg_pre)
    out = _resolve(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    learning_rate = FINETUNE_LEARNING_RATE if paper_lr else lr
    weighting = None if class_weight == "none" else class_weight
    summary = {"mode": mode, "epochs": epochs, "learning_rate": learning_rate,
               "batch_size": batch_size, "class_weight": class_weight,
               "seed": seed, "gamma": gamma, "runs": []}
    timing = {"runs": []}
    started = time.perf_counter()
    for run_index in range(runs):
        run_id = f"run{run_index + 1}"
        cfg = TrainConfig(epochs=epochs, learning_rate=learning_rate,
                          batch_size=batch_size, seed=run_seed(seed, run_index),
                          runs=1, class_weight=weighting)
        progress = None
        if not quiet:
            def progress(stats, run_id=run_id):
                val = "" if stats.val_accuracy is None else f" val_acc={stats.val_accuracy:.4f}"
                click.echo(f"{run_id} epoch {stats.epoch}: "
                           f"train_acc={stats.train_accuracy:.4f} loss={stats.train_loss:.4f}{val}")
        try:
            result = train_model(manifest, store, cfg, progress=progress)
        except ValueError as exc:
            raise click.ClickException(str(exc))
        run_dir = out / run_id
        run_dir.mkdir(exist_ok=True)
        save_model_file(result.final_model, run_dir / "model_final.wsqa")
        save_model_file(result.best_model, run_dir / "model_best.wsqa")
        (run_dir / "trace.csv").write_text(result.trace.to_csv(), encoding="utf-8")
        summary["runs"].append({
            "run_id": run_id,
            "seed": cfg.seed,
            "best_epoch": result.best_epoch,
            "best_val_accuracy": result.best_val_accuracy,
            "final_train_accuracy": result.trace.epochs[-1].train_accuracy,
        })
        timing["runs"].append({"run_id": run_id, "wall_seconds": result.wall_seconds})
        if not quiet:
            click.echo(f"{run_id}: best_epoch={result.best_epoch} "
                       f"best_val_acc={result.best_val_accuracy}")
    timing["total_seconds"] = time.perf_counter() - started
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    # Wall times live apart from summary.json so seeded reruns stay byte-identical.
    (out / "timing.json").write_text(json.dumps(timing, indent=2, sort_keys=True) + "\n")
    click.echo(f"trained {runs} run(s) into {out}")


# -- eval ----------------------------------------------------------------------


def _eval_model(model, manifest, store, threshold):
    items = [(e.scan_id, e.variant, 1 if e.verdict is Verdict.ERRONEOUS else 0)
             for e in manifest.split_entries("test")]
    if not items:
        raise click.ClickException("manifest has no test entries")
    predictions = predict_items(model, items, store.get, threshold=threshold)
    truths = [Verdict.ERRONEOUS if label else Verdict.FAULTLESS for _, _, label in items]
    return confusion(predictions, truths)


@main.command("eval")
@click.option("--manifest", "manifest_path", default="manifest.csv", show_default=True)
@click.option("--scans", "scans_dir", default="scans", show_default=True)
@click.option("--mode", type=click.Choice(["shrink", "scale"]), required=True)
@click.option("--run-dir", "run_dir", default=None,
              help="Directory holding run*/model_*.wsqa from `wsqa train`.")
@click.option("--model", "model_paths", multiple=True,
              help="Explicit model file(s); alternative to --run-dir.")
@click.option("--use-final", is_flag=True, help="Evaluate final-epoch models, not best-validation.")
@click.option("--threshold", type=float, default=0.5, show_default=True)
@click.option("--gamma", type=float, default=DEFAULT_GAMMA, show_default=True)
@click.option("--out", "out_path", default=None, help="Write the reports as JSON.")
def eval_cmd(manifest_path, scans_dir, mode, run_dir, model_paths, use_final,
             threshold, gamma, out_path):
    """Evaluate trained models on the manifest's test split."""
    manifest = DatasetManifest.from_csv(_resolve(manifest_path).read_text(encoding="utf-8"))
    cfg_pre = PreprocessConfig(gamma=gamma, mode=ResizeMode.parse(mode))
    test_ids = {e.scan_id for e in manifest.split_entries("test")}
    store = _load_store(_resolve(scans_dir), test_ids, cfg_pre)

    models: list[tuple[str, Path]] = []
    checkpoint = "final" if use_final else "best"
    if run_dir:
        base = _resolve(run_dir)
        for child in sorted(base.glob("run*")):
            path = child / f"model_{checkpoint}.wsqa"
            if path.exists():
                models.append((child.name, path))
        summary_path = base / "summary.json"
    else:
        summary_path = None
        for i, p in enumerate(model_paths):
            models.append((f"model{i + 1}", _resolve(p)))
    if not models:
        raise click.ClickException("no models found; pass --run-dir or --model")

    best_val = {}
    if summary_path and summary_path.exists():
        for entry in json.loads(summary_path.read_text())["runs"]:
            best_val[entry["run_id"]] = entry.get("best_val_accuracy")

    reports = []
    for run_id, path in models:
        cm = _eval_model(load_model_file(path), manifest, store, threshold)
        report = compute_metrics(cm, run_id=run_id, max_validation_accuracy=best_val.get(run_id))
        reports.append(report)
        click.echo(report_text(report), nl=False)
    if len(reports) == 1:
        aggregate = reports[0]
    else:
        try:
            aggregate = aggregate_runs(reports)
            click.echo(report_text(aggregate), nl=False)
        except ValueError as exc:
            aggregate = None
            click.echo(f"aggregate unavailable: {exc}", err=True)
    if out_path:
        payload = {
            "mode": mode,
            "checkpoint": checkpoint,
            "threshold": threshold,
            "runs": [r.to_json_dict() for r in reports],
            "aggregate": aggregate.to_json_dict() if aggregate else None,
        }
        _resolve(out_path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        click.echo(f"wrote {out_path}")


# -- compare -------------------------------------------------------------------


def _report_from_eval_json(path: Path, use_aggregate: bool) -> MetricsReport:
    payload = json.loads(path.read_text(encoding="utf-8"))
    if use_aggregate:
        return MetricsReport.from_json_dict(payload["aggregate"])
    runs = [MetricsReport.from_json_dict(r) for r in payload["runs"]]
    return max(runs, key=lambda r: (r.accuracy is not None, r.accuracy or 0.0))


@main.command()
@click.option("--shrunk", "shrunk_path", required=True, help="eval JSON for shrink mode.")
@click.option("--scaled", "scaled_path", required=True, help="eval JSON for scale mode.")
@click.option("--reference", "reference_path", default=None,
              help="Baseline JSON (percent units); defaults to the shipped fixture.")
@click.option("--use-aggregate", is_flag=True,
              help="Compare run averages instead of each mode's best run.")
def compare(shrunk_path, scaled_path, reference_path, use_aggregate):
    """Three-column comparison: shrunk vs scaled vs reference system."""
    shrunk = _report_from_eval_json(_resolve(shrunk_path), use_aggregate)
    scaled = _report_from_eval_json(_resolve(scaled_path), use_aggregate)
    if reference_path is None:
        reference = load_reference_fixture()
    else:
        ref_file = _resolve(reference_path)
        reference = load_reference_file(ref_file) if ref_file.exists() else None
        if reference is None:
            click.echo(f"reference file {ref_file} not found; column marked unavailable", err=True)
    click.echo(comparison_table(shrunk, scaled, reference), nl=False)


# -- serve ---------------------------------------------------------------------


@main.command()
@click.option("--model", "model_path", default=None, help="Model file; omit to serve labelling only.")
@click.option("--scans", "scans_dir", default="scans", show_default=True)
@click.option("--labels", "labels_path", default="labels.jsonl", show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--quorum", type=int, default=DEFAULT_QUORUM, show_default=True)
@click.option("--allow-relabel", is_flag=True)
@click.option("--threshold", type=float, default=0.5, show_default=True)
@click.option("--gamma", type=float, default=DEFAULT_GAMMA, show_default=True)
@click.option("--manifest", "manifest_path", default=None)
@click.option("--traces", "traces_dir", default=None)
def serve(model_path, scans_dir, labels_path, host, port, quorum, allow_relabel,
          threshold, gamma, manifest_path, traces_dir):
    """Run the classification + labelling HTTP service."""
    import uvicorn

    from .server import create_app

    model = load_model_file(_resolve(model_path)) if model_path else None
    store = LabelStore(_resolve(labels_path), quorum=quorum, allow_relabel=allow_relabel)
    app = create_app(
        model, _resolve(scans_dir), store, threshold=threshold, gamma=gamma,
        manifest_path=_resolve(manifest_path) if manifest_path else None,
        traces_dir=_resolve(traces_dir) if traces_dir else None,
    )
    uvicorn.run(app, host=host, port=port, log_level="info")


# -- bench ---------------------------------------------------------------------


@main.command("bench")
@click.option("--model", "model_path", required=True)
@click.option("--scans", "scans_dir", default="scans", show_default=True)
@click.option("-n", "samples", type=int, default=50, show_default=True)
@click.option("--mode", type=click.Choice(["shrink", "scale"]), default="scale", show_default=True)
@click.option("--out", "out_path", default=None)
def bench_cmd(model_path, scans_dir, samples, mode, out_path):
    """Measure model load and per-scan classification latency."""
    scans_path = _resolve(scans_dir)
    files = sorted(scans_path.glob("*.pgm"))[:samples]
    scans = [read_scan_pgm(p.read_bytes(), scan_id=p.stem) for p in files]
    cfg = PreprocessConfig(mode=ResizeMode.parse(mode))
    try:
        report = run_bench(_resolve(model_path), scans, samples, cfg)
    except ValueError as exc:
        raise click.ClickException(str(exc))
    click.echo(json.dumps(report.to_json_dict(), indent=2))
    if out_path:
        _resolve(out_path).write_text(json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
