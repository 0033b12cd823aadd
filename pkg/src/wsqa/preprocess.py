"""Scan pre-processing: gamma, max-normalization, 8-bit conversion, resize.

The chain runs normalize -> gamma -> quantize -> resize. For
max-normalization the gamma/normalize order is immaterial:
(x/m)^g == x^g / m^g for the strictly monotone power map, so both
orderings of the first two steps produce the same grid.

Resizing is separable bicubic convolution with the Keys kernel
(a = -0.5), clamp-to-edge boundary handling, and half-pixel-center
coordinate mapping: src = (dst + 0.5) * in_size / out_size - 0.5.
All real arithmetic is double precision; outputs are rounded
half-away-from-zero, so the 8-bit result is platform-independent.

Two strategies map a long seam scan onto the fixed 299x299 network
input: ``shrink`` resizes directly (strong compression along the long
axis), ``scale`` preserves aspect ratio and pads the remainder.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .scans import NETWORK_INPUT_SIZE, ProcessedImage, RawScan, ResizeMode
from .validation import as_scan_list

DEFAULT_GAMMA = 0.7
_KEYS_A = -0.5


@dataclass(frozen=True)
class PreprocessConfig:
    """Parameters of the pre-processing chain.

    ``target`` is pinned to 299; pass ``allow_target_override=True`` to
    experiment with other square sizes (the fixed-size ProcessedImage
    container only accepts 299, so overridden targets are reachable
    through ``network_array`` rather than ``to_network_input``).
    """

    gamma: float = DEFAULT_GAMMA
    target: int = NETWORK_INPUT_SIZE
    mode: ResizeMode = ResizeMode.SHRINK
    pad_value: int = 0
    allow_target_override: bool = False

    def __post_init__(self):
        if not (self.gamma > 0):
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.target != NETWORK_INPUT_SIZE and not self.allow_target_override:
            raise ValueError(
                f"target {self.target} differs from {NETWORK_INPUT_SIZE}; "
                "set allow_target_override=True if this is intentional"
            )
        if self.target < 1:
            raise ValueError("target must be >= 1")
        if not (0 <= self.pad_value <= 255):
            raise ValueError(f"pad_value must be an 8-bit intensity, got {self.pad_value}")


def normalize_and_gamma(scan: RawScan, gamma: float = DEFAULT_GAMMA) -> np.ndarray:
    """(pixel / max)^gamma as float64; the scan maximum maps to exactly 1."""
    if not (gamma > 0):
        raise ValueError(f"gamma must be positive, got {gamma}")
    m = int(scan.pixels.max())
    return np.power(scan.pixels / m, gamma)


def quantize_8bit(grid: np.ndarray) -> np.ndarray:
    """Map [0, 1] reals to uint8 by round-half-away-from-zero.

    Values are clipped to [0, 1] first, absorbing the sub-ulp excursions
    accumulated rounding can produce. A max-normalized input maps its
    maximum to exactly 255.
    """
    scaled = np.clip(np.asarray(grid, dtype=np.float64), 0.0, 1.0) * 255.0
    return np.floor(scaled + 0.5).astype(np.uint8)


def _bicubic_kernel(t: np.ndarray) -> np.ndarray:
    """Keys cubic convolution kernel with a = -0.5."""
    t = np.abs(t)
    out = np.zeros_like(t)
    near = t <= 1.0
    far = (t > 1.0) & (t < 2.0)
    out[near] = (_KEYS_A + 2.0) * t[near] ** 3 - (_KEYS_A + 3.0) * t[near] ** 2 + 1.0
    out[far] = _KEYS_A * (t[far] ** 3 - 5.0 * t[far] ** 2 + 8.0 * t[far] - 4.0)
    return out


def _resample_matrix(src: int, dst: int) -> np.ndarray:
    """(dst, src) weight matrix for 1-D bicubic resampling.

    Clamp-to-edge folds out-of-range tap weights onto the border sample,
    so each row still sums to the kernel's partition of unity.
    """
    w = np.zeros((dst, src), dtype=np.float64)
    positions = (np.arange(dst) + 0.5) * (src / dst) - 0.5
    base = np.floor(positions).astype(np.int64)
    frac = positions - base
    for tap in range(-1, 3):
        weights = _bicubic_kernel(frac - tap)
        cols = np.clip(base + tap, 0, src - 1)
        np.add.at(w, (np.arange(dst), cols), weights)
    return w


def resize_bicubic(grid: np.ndarray, out_w: int, out_h: int) -> np.ndarray:
    """Separable bicubic resize of an 8-bit grid, output 8-bit."""
    grid = np.asarray(grid)
    h, w = grid.shape
    if h < 2 or w < 2:
        raise ValueError(f"source must be at least 2x2, got {w}x{h}")
    if out_w < 1 or out_h < 1:
        raise ValueError(f"output dimensions must be >= 1, got {out_w}x{out_h}")
    rows = _resample_matrix(h, out_h)
    cols = _resample_matrix(w, out_w)
    resized = rows @ grid.astype(np.float64) @ cols.T
    return np.floor(np.clip(resized, 0.0, 255.0) + 0.5).astype(np.uint8)


def _round_half_away(x: float) -> int:
    return int(np.floor(x + 0.5))


def scale_geometry(width: int, height: int, target: int) -> tuple[int, int, int, int]:
    """Content size and placement for scale mode.

    Returns (content_w, content_h, left, top) for the aspect-preserving
    resize with factor target / max(width, height), centered on the
    canvas; an odd remainder leaves the extra pixel on the right/bottom.
    """
    f = target / max(width, height)
    content_w = max(1, _round_half_away(width * f))
    content_h = max(1, _round_half_away(height * f))
    left = (target - content_w) // 2
    top = (target - content_h) // 2
    return content_w, content_h, left, top


def network_array(scan: RawScan, cfg: PreprocessConfig) -> np.ndarray:
    """Run the full chain, returning the raw uint8 target-size array."""
    img8 = quantize_8bit(normalize_and_gamma(scan, cfg.gamma))
    if cfg.mode is ResizeMode.SHRINK:
        return resize_bicubic(img8, cfg.target, cfg.target)
    content_w, content_h, left, top = scale_geometry(scan.width, scan.height, cfg.target)
    content = resize_bicubic(img8, content_w, content_h)
    canvas = np.full((cfg.target, cfg.target), cfg.pad_value, dtype=np.uint8)
    canvas[top : top + content_h, left : left + content_w] = content
    return canvas


def to_network_input(scan: RawScan, cfg: PreprocessConfig | None = None) -> ProcessedImage:
    """Preprocess one scan into the fixed 299x299 network input."""
    cfg = cfg or PreprocessConfig()
    if cfg.target != NETWORK_INPUT_SIZE:
        raise ValueError(
            f"ProcessedImage is fixed at {NETWORK_INPUT_SIZE}x{NETWORK_INPUT_SIZE}; "
            "use network_array() for overridden targets"
        )
    return ProcessedImage(
        pixels=network_array(scan, cfg),
        resize_mode=cfg.mode,
        source_scan_id=scan.id,
    )


class ScanPreprocessor(BaseEstimator, TransformerMixin):
    """sklearn-style transformer wrapping the pre-processing chain.

    Stateless; ``fit`` only validates parameters. ``transform`` maps an
    iterable of RawScan to a list of ProcessedImage.
    """

    def __init__(self, mode: str = "shrink", gamma: float = DEFAULT_GAMMA, pad_value: int = 0):
        self.mode = mode
        self.gamma = gamma
        self.pad_value = pad_value

    def _config(self) -> PreprocessConfig:
        mode = self.mode if isinstance(self.mode, ResizeMode) else ResizeMode.parse(self.mode)
        return PreprocessConfig(gamma=self.gamma, mode=mode, pad_value=self.pad_value)

    def fit(self, X=None, y=None):
        self._config()
        return self

    def transform(self, X) -> list[ProcessedImage]:
        cfg = self._config()
        return [to_network_input(scan, cfg) for scan in as_scan_list(X)]
