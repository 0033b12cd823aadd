"""Flip augmentation and scan-exclusive balanced dataset partitioning.

Every base scan contributes four entries (identity plus horizontal,
vertical, and combined reflections), all assigned to the same split so
no scan leaks across train/validation/test. Validation and test carry
equal counts per class; everything else trains.
"""

from __future__ import annotations

import io
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .rng import PortableRng
from .scans import Augmentation, ProcessedImage, Verdict

VARIANTS = (Augmentation.NONE, Augmentation.HFLIP, Augmentation.VFLIP, Augmentation.HVFLIP)
SPLITS = ("train", "validation", "test")


def flip_pixels(pixels: np.ndarray, variant: Augmentation) -> np.ndarray:
    if variant is Augmentation.NONE:
        return pixels
    if variant is Augmentation.HFLIP:
        return pixels[:, ::-1]
    if variant is Augmentation.VFLIP:
        return pixels[::-1, :]
    return pixels[::-1, ::-1]


def augment(img: ProcessedImage) -> list[ProcessedImage]:
    """The four reflection variants of one image; labels are inherited."""
    return [
        ProcessedImage(
            pixels=np.ascontiguousarray(flip_pixels(img.pixels, variant)),
            resize_mode=img.resize_mode,
            source_scan_id=img.source_scan_id,
            augmentation=variant,
        )
        for variant in VARIANTS
    ]


@dataclass(frozen=True)
class ManifestEntry:
    scan_id: str
    variant: Augmentation
    split: str
    verdict: Verdict


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[ManifestEntry, ...]
    seed: int

    def split_entries(self, split: str) -> list[ManifestEntry]:
        if split not in SPLITS:
            raise ValueError(f"unknown split {split!r}")
        return [e for e in self.entries if e.split == split]

    def counts(self) -> dict[str, dict[Verdict, int]]:
        out: dict[str, dict[Verdict, int]] = {s: {v: 0 for v in Verdict} for s in SPLITS}
        for e in self.entries:
            out[e.split][e.verdict] += 1
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# seed={self.seed}\n")
        buf.write("scan_id,variant,split,verdict\n")
        for e in self.entries:
            buf.write(f"{e.scan_id},{e.variant.value},{e.split},{e.verdict.value}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "DatasetManifest":
        seed = 0
        entries = []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if "seed=" in line:
                    seed = int(line.split("seed=")[1].strip())
                continue
            if line == "scan_id,variant,split,verdict":
                continue
            scan_id, variant, split, verdict = line.split(",")
            if split not in SPLITS:
                raise ValueError(f"unknown split {split!r} in manifest")
            entries.append(
                ManifestEntry(scan_id, Augmentation.parse(variant), split, Verdict.parse(verdict))
            )
        return cls(entries=tuple(entries), seed=seed)


def split(corpus, val_per_class: int, test_per_class: int, seed: int) -> DatasetManifest:
    """Partition base scans into train/validation/test, variants attached.

    ``corpus`` is an iterable of (scan_id, Verdict). Selection is a
    seeded uniform shuffle per class over base scans sorted by id, so
    the manifest is independent of corpus ordering. The first
    ``val_per_class`` shuffled scans of each class go to validation, the
    next ``test_per_class`` to test, the rest to train.
    """
    if val_per_class < 0 or test_per_class < 0:
        raise ValueError("per-class counts must be >= 0")
    by_class: dict[Verdict, list[str]] = defaultdict(list)
    seen = set()
    for scan_id, verdict in corpus:
        if scan_id in seen:
            raise ValueError(f"duplicate scan id {scan_id!r} in corpus")
        seen.add(scan_id)
        by_class[verdict].append(scan_id)

    rng = PortableRng(seed)
    assignment: dict[str, str] = {}
    verdict_of: dict[str, Verdict] = {}
    need = val_per_class + test_per_class
    for verdict in (Verdict.FAULTLESS, Verdict.ERRONEOUS):
        ids = sorted(by_class.get(verdict, []))
        if len(ids) < need:
            raise ValueError(
                f"class {verdict.value} has {len(ids)} scans, "
                f"needs at least {need} for validation+test"
            )
        rng.shuffle(ids)
        for i, scan_id in enumerate(ids):
            if i < val_per_class:
                assignment[scan_id] = "validation"
            elif i < need:
                assignment[scan_id] = "test"
            else:
                assignment[scan_id] = "train"
            verdict_of[scan_id] = verdict

    entries = []
    for scan_id in sorted(assignment):
        for variant in VARIANTS:
            entries.append(
                ManifestEntry(scan_id, variant, assignment[scan_id], verdict_of[scan_id])
            )
    return DatasetManifest(entries=tuple(entries), seed=seed)


def verify_manifest(manifest: DatasetManifest) -> list[str]:
    """All invariant violations in a manifest; empty means valid."""
    violations: list[str] = []
    per_scan: dict[str, list[ManifestEntry]] = defaultdict(list)
    for e in manifest.entries:
        per_scan[e.scan_id].append(e)

    for scan_id, entries in sorted(per_scan.items()):
        variants = [e.variant for e in entries]
        if sorted(v.value for v in variants) != sorted(v.value for v in VARIANTS):
            violations.append(
                f"scan {scan_id}: expected one entry per variant, got "
                f"{[v.value for v in variants]}"
            )
        splits = {e.split for e in entries}
        if len(splits) > 1:
            violations.append(
                f"scan {scan_id}: variants spread across splits {sorted(splits)}"
            )
        verdicts = {e.verdict for e in entries}
        if len(verdicts) > 1:
            violations.append(f"scan {scan_id}: inconsistent verdicts across variants")

    counts = manifest.counts()
    for split_name in ("validation", "test"):
        pos = counts[split_name][Verdict.ERRONEOUS]
        neg = counts[split_name][Verdict.FAULTLESS]
        if pos != neg:
            violations.append(
                f"{split_name} split is unbalanced: {neg} faultless vs {pos} erroneous"
            )
    return violations
