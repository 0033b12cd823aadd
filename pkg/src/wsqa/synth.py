"""Deterministic synthetic weld-seam scan generator.

Stands in for a proprietary laser-triangulation corpus at desk scale.
Faultless scans show a continuous bright seam band with periodic ripple
texture over a darker plate; erroneous scans additionally carry one or
two defects drawn from four archetypes:

* pore          dark elliptical blob on the seam
* interruption  near-zero gap across the band, >= 2% of the scan width
* spatter       bright specks off the seam
* undercut      darkened groove along one seam edge (deliberately subtle)

Three interference modes perturb *all* scans without changing labels:
per-scan vertical displacement of the band, a multiplicative gain shift
in [0.7, 1.3] (applied before additive noise), and zero-mean Gaussian
noise. Every draw comes from a per-scan PortableRng stream keyed by
(seed, scan index), so output is bit-identical for a given config.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .rng import PortableRng
from .scans import RawScan, ScanSource, Verdict

DEFECT_KINDS = ("pore", "interruption", "spatter", "undercut")

DEFAULT_WIDTH = 1600
DEFAULT_HEIGHT = 200
DEFAULT_NOISE_SIGMA = 250.0

REFERENCE_FAULTLESS = 553
REFERENCE_ERRONEOUS = 63


def _default_mix() -> dict[str, float]:
    return {kind: 1.0 for kind in DEFECT_KINDS}


@dataclass(frozen=True)
class GenConfig:
    seed: int
    width: int = DEFAULT_WIDTH
    height: int = DEFAULT_HEIGHT
    n_faultless: int = 0
    n_erroneous: int = 0
    defect_mix: dict[str, float] = field(default_factory=_default_mix)
    vertical_displacement: bool = True
    gain_shift: bool = True
    additive_noise_sigma: float = DEFAULT_NOISE_SIGMA

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"zero-area config: {self.width}x{self.height}")
        if self.width <= self.height:
            raise ValueError("long-seam geometry requires width > height")
        if self.n_faultless < 0 or self.n_erroneous < 0:
            raise ValueError("scan counts must be >= 0")
        if self.additive_noise_sigma < 0:
            raise ValueError("noise sigma must be >= 0")
        for kind, weight in self.defect_mix.items():
            if kind not in DEFECT_KINDS:
                raise ValueError(f"unknown defect kind {kind!r}")
            if weight < 0:
                raise ValueError(f"negative weight for defect {kind!r}")
        if self.n_erroneous > 0 and sum(self.defect_mix.values()) <= 0:
            raise ValueError("n_erroneous > 0 requires a non-empty defect mix")


@dataclass(frozen=True)
class SynthRecord:
    scan: RawScan
    verdict: Verdict
    defects: tuple[str, ...]


@dataclass
class _SeamGeometry:
    center: float
    half_height: float
    amplitude: float


def _pick_defect(rng: PortableRng, mix: dict[str, float]) -> str:
    kinds = [k for k in DEFECT_KINDS if mix.get(k, 0.0) > 0]
    weights = np.array([mix[k] for k in kinds], dtype=np.float64)
    cum = np.cumsum(weights / weights.sum())
    r = rng.random()
    for kind, edge in zip(kinds, cum):
        if r < edge:
            return kind
    return kinds[-1]


def _render_pore(rng, seam_gain, xs, ys, geo, width):
    """Porosity chain: several dark cavities strung along the seam."""
    n_pores = rng.integers(5, 13)
    chain_start = rng.uniform(0.05, 0.55) * width
    chain_span = rng.uniform(0.25, 0.45) * width
    for _ in range(n_pores):
        cx = chain_start + rng.random() * chain_span
        cy = geo.center + rng.uniform(-0.5, 0.5) * geo.half_height
        rx = rng.uniform(30.0, 60.0)
        ry = min(rng.uniform(9.0, 20.0), 0.95 * geo.half_height)
        d2 = ((xs - cx) / rx) ** 2 + ((ys - cy) / ry) ** 2
        mask = np.clip((1.0 - d2) * 3.0, 0.0, 1.0)
        seam_gain *= 1.0 - 0.92 * mask


def _render_interruption(rng, seam_gain, plate_gain, xs, band_rows, width):
    n_gaps = rng.integers(1, 4)
    for _ in range(n_gaps):
        gap_len = rng.uniform(0.04, 0.1) * width
        x0 = rng.uniform(0.05, 0.92) * (width - gap_len)
        ramp = np.clip((xs[0] - x0) / 3.0, 0.0, 1.0) * np.clip((x0 + gap_len - xs[0]) / 3.0, 0.0, 1.0)
        gap2d = band_rows[:, None] * ramp[None, :]
        seam_gain *= 1.0 - 0.97 * gap2d
        plate_gain *= 1.0 - 0.7 * gap2d


def _render_spatter(rng, extra, geo, width, height):
    n_specks = rng.integers(30, 70)
    for _ in range(n_specks):
        sx = rng.uniform(0.02, 0.98) * width
        side = 1.0 if rng.random() < 0.5 else -1.0
        offset = geo.half_height * 1.6 + rng.uniform(3.0, max(4.0, height / 2 - geo.half_height * 1.8))
        sy = min(max(geo.center + side * offset, 2.0), height - 3.0)
        r = rng.uniform(3.0, 7.0)
        brightness = geo.amplitude * rng.uniform(0.9, 1.35)
        x_lo = max(0, int(sx - 3 * r))
        x_hi = min(width, int(sx + 3 * r) + 1)
        y_lo = max(0, int(sy - 3 * r))
        y_hi = min(height, int(sy + 3 * r) + 1)
        yy, xx = np.mgrid[y_lo:y_hi, x_lo:x_hi]
        d2 = ((xx - sx) ** 2 + (yy - sy) ** 2) / (r * r)
        extra[y_lo:y_hi, x_lo:x_hi] += brightness * np.exp(-d2)


def _render_undercut(rng, seam_gain, plate_gain, xs, ys, geo, width):
    """Groove melted along the weld toe: a long dark line just inside
    the bright plateau's edge. Subtle per pixel, but it runs a third to
    three quarters of the scan."""
    side = 1.0 if rng.random() < 0.5 else -1.0
    edge_row = geo.center + side * geo.half_height * rng.uniform(0.6, 0.85)
    strip = rng.uniform(8.0, 16.0)
    run_len = rng.uniform(0.4, 0.8) * width
    x0 = rng.uniform(0.02, 0.95) * (width - run_len)
    run = np.clip((xs[0] - x0) / 10.0, 0.0, 1.0) * np.clip((x0 + run_len - xs[0]) / 10.0, 0.0, 1.0)
    groove = 1.0 - 0.6 * np.exp(-(((ys[:, 0] - edge_row) / strip) ** 2))[:, None] * run[None, :]
    seam_gain *= groove
    plate_gain *= groove


def _render_scan(rng: PortableRng, cfg: GenConfig, defects: list[str]) -> np.ndarray:
    """Compose one scan in float64 and quantize to uint16.

    Draw order is fixed (geometry, plate, seam texture, defects in list
    order, gain, noise); changing it would silently change every seeded
    corpus, so treat it as part of the file format.
    """
    w, h = cfg.width, cfg.height
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)

    displacement = rng.uniform(-0.15, 0.15) * h if cfg.vertical_displacement else 0.0
    geo = _SeamGeometry(
        center=h / 2.0 + displacement,
        half_height=rng.uniform(0.11, 0.16) * h,
        amplitude=rng.uniform(30000.0, 42000.0),
    )

    plate_base = rng.uniform(5500.0, 7500.0)
    wave_amp = rng.uniform(200.0, 600.0)
    wave_period = rng.uniform(0.5, 1.5) * w
    wave_phase = rng.uniform(0.0, 2.0 * math.pi)
    plate = plate_base + wave_amp * np.sin(2.0 * math.pi * xs[0] / wave_period + wave_phase)
    plate = np.broadcast_to(plate, (h, w)).copy()
    plate += rng.normal(h * w, 200.0).reshape(h, w)

    ripple_period = rng.uniform(25.0, 60.0)
    phase1 = rng.uniform(0.0, 2.0 * math.pi)
    phase2 = rng.uniform(0.0, 2.0 * math.pi)
    drift_period = rng.uniform(0.6, 1.4) * w
    phase3 = rng.uniform(0.0, 2.0 * math.pi)
    x_line = xs[0]
    ripple = (
        1.0
        + 0.15 * np.sin(2.0 * math.pi * x_line / ripple_period + phase1)
        + 0.05 * np.sin(2.0 * math.pi * x_line / (ripple_period / 2.3) + phase2)
    )
    drift = 1.0 + 0.08 * np.sin(2.0 * math.pi * x_line / drift_period + phase3)
    # Laser-stripe cross profile: flat bright plateau, fast edge falloff.
    profile = np.exp(-(((ys[:, 0] - geo.center) / geo.half_height) ** 8))
    seam = geo.amplitude * (ripple * drift)[None, :] * profile[:, None]

    seam_gain = np.ones((h, w), dtype=np.float64)
    plate_gain = np.ones((h, w), dtype=np.float64)
    spatter_extra = np.zeros((h, w), dtype=np.float64)
    band_rows = (profile > 0.05).astype(np.float64)

    for kind in defects:
        if kind == "pore":
            _render_pore(rng, seam_gain, xs, ys, geo, w)
        elif kind == "interruption":
            _render_interruption(rng, seam_gain, plate_gain, xs, band_rows, w)
        elif kind == "spatter":
            _render_spatter(rng, spatter_extra, geo, w, h)
        elif kind == "undercut":
            _render_undercut(rng, seam_gain, plate_gain, xs, ys, geo, w)

    img = plate * plate_gain + seam * seam_gain + spatter_extra

    if cfg.gain_shift:
        img *= rng.uniform(0.7, 1.3)
    if cfg.additive_noise_sigma > 0:
        img += rng.normal(h * w, cfg.additive_noise_sigma).reshape(h, w)

    return np.floor(np.clip(img, 0.0, 65535.0) + 0.5).astype(np.uint16)


def scan_id_for(seed: int, index: int) -> str:
    return f"{seed & 0xFFFFFFFFFFFFFFFF:016x}-{index:05d}"


def generate_records(cfg: GenConfig) -> list[SynthRecord]:
    """All scans for a config: faultless first, then erroneous."""
    root = PortableRng(cfg.seed)
    records = []
    total = cfg.n_faultless + cfg.n_erroneous
    for index in range(total):
        rng = root.spawn(index)
        erroneous = index >= cfg.n_faultless
        defects: list[str] = []
        if erroneous:
            roll = rng.random()
            n_defects = 1 if roll < 0.5 else (2 if roll < 0.8 else 3)
            defects = [_pick_defect(rng, cfg.defect_mix) for _ in range(n_defects)]
        pixels = _render_scan(rng, cfg, defects)
        scan = RawScan(
            id=scan_id_for(cfg.seed, index),
            pixels=pixels,
            seam_type="synthetic-longitudinal",
            source=ScanSource.SYNTHETIC,
        )
        verdict = Verdict.ERRONEOUS if defects else Verdict.FAULTLESS
        records.append(SynthRecord(scan=scan, verdict=verdict, defects=tuple(defects)))
    return records


def generate(cfg: GenConfig) -> list[tuple[RawScan, Verdict]]:
    return [(r.scan, r.verdict) for r in generate_records(cfg)]


def default_corpus(seed: int) -> list[tuple[RawScan, Verdict]]:
    """553 faultless + 63 erroneous scans, all interference modes on."""
    return generate(default_corpus_config(seed))


def default_corpus_config(seed: int) -> GenConfig:
    return GenConfig(seed=seed, n_faultless=REFERENCE_FAULTLESS, n_erroneous=REFERENCE_ERRONEOUS)
