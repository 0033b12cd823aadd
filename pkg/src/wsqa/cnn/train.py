"""SGD training loop: fixed learning rate, seeded shuffling, checkpoints.

Training follows the evaluation protocol of the inspection pipeline:
plain SGD with a fixed learning rate (no schedule, no momentum), seeded
per-epoch shuffling, and a retained best-validation-accuracy checkpoint
next to the final model. The run harness trains several independently
initialized models from per-run derived seeds.
"""

from __future__ import annotations

import io
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..dataset import DatasetManifest, flip_pixels
from ..preprocess import PreprocessConfig, network_array
from ..rng import PortableRng
from ..scans import Augmentation, RawScan, Verdict
from .layers import softmax_cross_entropy
from .model import ERRONEOUS_INDEX, Model, init_model

_INIT_STREAM = 0
_SHUFFLE_STREAM = 1


class TrainingDivergedError(RuntimeError):
    """Raised when the loss turns non-finite; carries the epoch/batch."""


class MissingImageError(KeyError):
    """Raised when a manifest entry has no backing image."""


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 150
    learning_rate: float = 1e-2
    batch_size: int = 16
    seed: int = 0
    runs: int = 3
    class_weight: str | None = None  # None keeps the raw imbalance; "balanced" reweights

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if not (self.learning_rate > 0):
            raise ValueError(f"learning rate must be positive, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ValueError(f"batch size must be >= 1, got {self.batch_size}")
        if self.runs < 1:
            raise ValueError(f"runs must be >= 1, got {self.runs}")
        if self.class_weight not in (None, "balanced"):
            raise ValueError(f"class_weight must be None or 'balanced', got {self.class_weight!r}")


FINETUNE_LEARNING_RATE = 1e-6  # fine-tuning preset; far too small for a fresh desk net
FINETUNE_EPOCHS = 150


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    train_accuracy: float
    train_loss: float
    val_accuracy: float | None
    val_loss: float | None


@dataclass
class TrainTrace:
    epochs: list[EpochStats] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("epoch,train_acc,train_loss,val_acc,val_loss\n")
        for e in self.epochs:
            va = "" if e.val_accuracy is None else repr(e.val_accuracy)
            vl = "" if e.val_loss is None else repr(e.val_loss)
            buf.write(f"{e.epoch},{e.train_accuracy!r},{e.train_loss!r},{va},{vl}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "TrainTrace":
        trace = cls()
        for line in text.splitlines()[1:]:
            if not line.strip():
                continue
            epoch, ta, tl, va, vl = line.split(",")
            trace.epochs.append(EpochStats(
                epoch=int(epoch),
                train_accuracy=float(ta),
                train_loss=float(tl),
                val_accuracy=float(va) if va else None,
                val_loss=float(vl) if vl else None,
            ))
        return trace


@dataclass
class TrainResult:
    final_model: Model
    best_model: Model
    best_epoch: int
    best_val_accuracy: float | None
    trace: TrainTrace
    wall_seconds: float


# -- image stores -------------------------------------------------------------


class InMemoryImageStore:
    """Base processed images by scan id; flip variants served on demand."""

    def __init__(self, images: dict[str, np.ndarray]):
        self._images = images

    @classmethod
    def from_scans(cls, scans: list[RawScan], cfg: PreprocessConfig) -> "InMemoryImageStore":
        return cls({scan.id: network_array(scan, cfg) for scan in scans})

    def __contains__(self, scan_id: str) -> bool:
        return scan_id in self._images

    def get(self, scan_id: str, variant: Augmentation = Augmentation.NONE) -> np.ndarray:
        try:
            base = self._images[scan_id]
        except KeyError:
            raise MissingImageError(f"no image for scan {scan_id!r}") from None
        return flip_pixels(base, variant)


class PgmDirectoryStore:
    """Lazily reads `<scan_id>.pgm` processed images from a directory."""

    def __init__(self, directory):
        self._dir = Path(directory)
        self._cache: dict[str, np.ndarray] = {}

    def get(self, scan_id: str, variant: Augmentation = Augmentation.NONE) -> np.ndarray:
        if scan_id not in self._cache:
            path = self._dir / f"{scan_id}.pgm"
            if not path.exists():
                raise MissingImageError(f"no image file for scan {scan_id!r} under {self._dir}")
            from ..scans import read_image_pgm

            self._cache[scan_id] = read_image_pgm(path.read_bytes(), scan_id).pixels
        return flip_pixels(self._cache[scan_id], variant)


# -- core loop ----------------------------------------------------------------


def _batch_tensor(items, fetch, dtype):
    images = np.stack([fetch(scan_id, variant) for scan_id, variant, _ in items])
    x = images.astype(dtype)[:, None, :, :]
    x /= np.asarray(255, dtype=dtype)
    y = np.array([label for _, _, label in items], dtype=np.int64)
    return x, y


def _eval_items(model: Model, items, fetch, batch_size: int):
    """Mean loss and argmax accuracy over fixed items."""
    total_loss = 0.0
    correct = 0
    for start in range(0, len(items), batch_size):
        chunk = items[start : start + batch_size]
        x, y = _batch_tensor(chunk, fetch, model.dtype)
        logits = model.forward_logits(x)
        loss, _, probs = softmax_cross_entropy(logits, y)
        total_loss += loss * len(chunk)
        correct += int((probs.argmax(axis=1) == y).sum())
    return correct / len(items), total_loss / len(items)


def fit_items(train_items, val_items, fetch, cfg: TrainConfig,
              progress=None) -> TrainResult:
    """Train on (scan_id, variant, label) items with images from ``fetch``.

    Checkpoint rule: strictly higher validation accuracy replaces the
    retained best model, so ties keep the earliest epoch.
    """
    if not train_items:
        raise ValueError("no training items")
    start_time = time.perf_counter()
    root = PortableRng(cfg.seed)
    model = init_model(root.spawn(_INIT_STREAM).key)
    shuffle_rng = root.spawn(_SHUFFLE_STREAM)

    weight_of = None
    if cfg.class_weight == "balanced":
        # n_total / (n_classes * n_c), so each class carries equal total pull
        labels = np.array([label for _, _, label in train_items])
        counts = np.bincount(labels, minlength=2)
        if counts.min() == 0:
            raise ValueError("balanced class weights need both classes in the train split")
        weight_of = (len(labels) / (2.0 * counts)).astype(np.float64)

    trace = TrainTrace()
    best_model = None
    best_epoch = 0
    best_val = -1.0
    lr = np.asarray(cfg.learning_rate, dtype=model.dtype)

    for epoch in range(1, cfg.epochs + 1):
        order = shuffle_rng.permutation(len(train_items))
        epoch_loss = 0.0
        correct = 0
        for start in range(0, len(order), cfg.batch_size):
            batch = [train_items[i] for i in order[start : start + cfg.batch_size]]
            x, y = _batch_tensor(batch, fetch, model.dtype)
            logits = model.forward_logits(x, train=True)
            weights = weight_of[y] if weight_of is not None else None
            loss, dlogits, probs = softmax_cross_entropy(logits, y, weights)
            if not math.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}, batch {start // cfg.batch_size}; "
                    "lower the learning rate"
                )
            model.backward(dlogits)
            for p, g in zip(model.parameters(), model.gradients()):
                p -= lr * g
            epoch_loss += loss * len(batch)
            correct += int((probs.argmax(axis=1) == y).sum())

        train_acc = correct / len(train_items)
        train_loss = epoch_loss / len(train_items)
        if val_items:
            val_acc, val_loss = _eval_items(model, val_items, fetch, cfg.batch_size)
            if val_acc > best_val:
                best_val = val_acc
                best_epoch = epoch
                best_model = model.copy()
        else:
            val_acc = val_loss = None
        trace.epochs.append(EpochStats(epoch, train_acc, train_loss, val_acc, val_loss))
        if progress is not None:
            progress(trace.epochs[-1])

    if best_model is None:
        best_model = model.copy()
        best_epoch = cfg.epochs
    return TrainResult(
        final_model=model,
        best_model=best_model,
        best_epoch=best_epoch,
        best_val_accuracy=None if best_val < 0 else best_val,
        trace=trace,
        wall_seconds=time.perf_counter() - start_time,
    )


def _manifest_items(manifest: DatasetManifest, split: str):
    return [
        (e.scan_id, e.variant, ERRONEOUS_INDEX if e.verdict is Verdict.ERRONEOUS else 0)
        for e in manifest.split_entries(split)
    ]


def train(manifest: DatasetManifest, store, cfg: TrainConfig, progress=None) -> TrainResult:
    """Train one model over a manifest's train split, validating per epoch."""
    train_items = _manifest_items(manifest, "train")
    val_items = _manifest_items(manifest, "validation")
    for scan_id in sorted({sid for sid, _, _ in train_items + val_items}):
        store.get(scan_id)  # surface missing images before the first epoch
    return fit_items(train_items, val_items, store.get, cfg, progress=progress)


def run_seed(base_seed: int, run_index: int) -> int:
    """Per-run seed for the multi-run harness (derived stream keys)."""
    return PortableRng(base_seed).spawn(run_index + 2).key


def predict_items(model: Model, items, fetch, batch_size: int = 64,
                  threshold: float = 0.5) -> list[Verdict]:
    """Thresholded verdicts in item order (ties classify Erroneous)."""
    verdicts: list[Verdict] = []
    for start in range(0, len(items), batch_size):
        chunk = items[start : start + batch_size]
        images = np.stack([fetch(scan_id, variant) for scan_id, variant, _ in chunk])
        probs = model.predict_proba(images)
        for p_err in probs[:, ERRONEOUS_INDEX]:
            verdicts.append(Verdict.ERRONEOUS if p_err >= threshold else Verdict.FAULTLESS)
    return verdicts
