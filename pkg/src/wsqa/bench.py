"""Latency benchmark for the inference path.

Measures one cold model load, then per-image classification on
preprocessed inputs and the full raw-scan-to-verdict path. Production
context: the reference setup classified a preprocessed seam in 12 ms
after an 8 s model load; the desk model is far smaller, and the
acceptance bound is a deliberately loose 50 ms median.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

from .cnn.model import classify
from .cnn.serialize import load_model_file
from .preprocess import PreprocessConfig, to_network_input
from .scans import RawScan


@dataclass(frozen=True)
class BenchReport:
    model_load_ms: float
    classify_ms_min: float
    classify_ms_median: float
    classify_ms_p99: float
    end_to_end_ms_median: float
    samples: int

    def __post_init__(self):
        if self.classify_ms_median > self.classify_ms_p99:
            raise ValueError("median latency cannot exceed p99")

    def to_json_dict(self) -> dict:
        return {
            "samples": self.samples,
            "model_load_ms": self.model_load_ms,
            "classify_ms": {
                "min": self.classify_ms_min,
                "median": self.classify_ms_median,
                "p99": self.classify_ms_p99,
            },
            "end_to_end_ms_median": self.end_to_end_ms_median,
        }


def _median(values: list[float]) -> float:
    ordered = sorted(values)
    mid = len(ordered) // 2
    if len(ordered) % 2:
        return ordered[mid]
    return 0.5 * (ordered[mid - 1] + ordered[mid])


def _nearest_rank(values: list[float], q: float) -> float:
    ordered = sorted(values)
    rank = min(len(ordered), max(1, math.ceil(q * len(ordered))))
    return ordered[rank - 1]


def bench(model_path, scans: list[RawScan], n: int,
          cfg: PreprocessConfig | None = None, threshold: float = 0.5) -> BenchReport:
    """Time n classify calls (preprocessed) and n end-to-end calls."""
    if n < 1:
        raise ValueError(f"need at least one sample, got {n}")
    if len(scans) < n:
        raise ValueError(f"need {n} scans, got {len(scans)}")
    cfg = cfg or PreprocessConfig()

    started = time.perf_counter()
    model = load_model_file(model_path)
    model_load_ms = (time.perf_counter() - started) * 1000.0

    subset = scans[:n]
    images = [to_network_input(scan, cfg) for scan in subset]
    # Warm one pass so the first timed sample does not pay numpy setup.
    classify(model, images[0], threshold)

    classify_ms = []
    for img in images:
        t0 = time.perf_counter()
        classify(model, img, threshold)
        classify_ms.append((time.perf_counter() - t0) * 1000.0)

    end_to_end_ms = []
    for scan in subset:
        t0 = time.perf_counter()
        classify(model, to_network_input(scan, cfg), threshold)
        end_to_end_ms.append((time.perf_counter() - t0) * 1000.0)

    return BenchReport(
        model_load_ms=model_load_ms,
        classify_ms_min=min(classify_ms),
        classify_ms_median=_median(classify_ms),
        classify_ms_p99=_nearest_rank(classify_ms, 0.99),
        end_to_end_ms_median=_median(end_to_end_ms),
        samples=n,
    )
