"""Weld-seam quality assurance toolkit.

End-to-end optical inspection at desk scale: synthetic 16-bit
laser-triangulation scans, the four-step preprocessing chain, flip
augmentation with scan-exclusive balanced splits, a compact
convolutional classifier trained from scratch, confusion-matrix
metrics with multi-run averaging, and an HTTP service for in-line
classification plus committee labelling.
"""

from .scans import (
    Augmentation,
    CommitteeRecord,
    ProcessedImage,
    RawScan,
    ResizeMode,
    ScanSource,
    Verdict,
)

__version__ = "0.1.0"

__all__ = [
    "Augmentation",
    "CommitteeRecord",
    "ProcessedImage",
    "RawScan",
    "ResizeMode",
    "ScanSource",
    "Verdict",
    "__version__",
]
