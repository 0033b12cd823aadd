"""Domain types for weld-seam scans plus bit-exact binary PGM I/O.

Raw scans are 16-bit grayscale (binary PGM, maxval 65535, big-endian
samples per the PGM convention); network-ready images are 8-bit 299x299
(binary PGM, maxval 255). Both round-trip byte-exactly through the
codecs below, modulo comment lines a foreign writer may have inserted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

NETWORK_INPUT_SIZE = 299


class PgmFormatError(ValueError):
    """Raised for malformed or unsupported PGM payloads."""


class Verdict(Enum):
    """Binary seam quality call. Erroneous is the positive class."""

    FAULTLESS = "Faultless"
    ERRONEOUS = "Erroneous"

    @classmethod
    def parse(cls, text: str) -> "Verdict":
        for v in cls:
            if v.value == text:
                return v
        raise ValueError(f"unknown verdict {text!r}; expected 'Faultless' or 'Erroneous'")

    def __str__(self) -> str:
        return self.value


class ScanSource(Enum):
    SYNTHETIC = "synthetic"
    INGESTED = "ingested"


class Augmentation(Enum):
    NONE = "none"
    HFLIP = "hflip"
    VFLIP = "vflip"
    HVFLIP = "hvflip"

    @classmethod
    def parse(cls, text: str) -> "Augmentation":
        for v in cls:
            if v.value == text:
                return v
        raise ValueError(f"unknown augmentation variant {text!r}")


class ResizeMode(Enum):
    SHRINK = "shrink"
    SCALE = "scale"

    @classmethod
    def parse(cls, text: str) -> "ResizeMode":
        for v in cls:
            if v.value == text:
                return v
        raise ValueError(f"unknown resize mode {text!r}; expected 'shrink' or 'scale'")


def _frozen_array(pixels, dtype) -> np.ndarray:
    arr = np.ascontiguousarray(pixels, dtype=dtype)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class RawScan:
    """One 16-bit intensity scan of a seam, immutable after construction.

    ``pixels`` is row-major with shape (height, width). Max-normalization
    downstream requires at least one nonzero pixel, enforced here.
    """

    id: str
    pixels: np.ndarray
    seam_type: str = ""
    source: ScanSource = ScanSource.INGESTED

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"scan {self.id!r}: pixels must be a non-empty 2-D grid, got shape {arr.shape}")
        if arr.dtype != np.uint16:
            if not np.issubdtype(arr.dtype, np.integer):
                raise ValueError(f"scan {self.id!r}: pixel values must be integers in [0, 65535]")
            if arr.min() < 0 or arr.max() > 65535:
                raise ValueError(f"scan {self.id!r}: pixel values outside [0, 65535]")
        if not arr.any():
            raise ValueError(f"scan {self.id!r}: all-zero scan cannot be max-normalized")
        object.__setattr__(self, "pixels", _frozen_array(arr, np.uint16))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class ProcessedImage:
    """Network-ready 8-bit image, fixed at 299x299."""

    pixels: np.ndarray
    resize_mode: ResizeMode
    source_scan_id: str
    augmentation: Augmentation = Augmentation.NONE

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.shape != (NETWORK_INPUT_SIZE, NETWORK_INPUT_SIZE):
            raise ValueError(
                f"processed image must be {NETWORK_INPUT_SIZE}x{NETWORK_INPUT_SIZE}, got {arr.shape}"
            )
        if arr.dtype != np.uint8:
            if not np.issubdtype(arr.dtype, np.integer) or arr.min() < 0 or arr.max() > 255:
                raise ValueError("processed image pixels must be integers in [0, 255]")
        object.__setattr__(self, "pixels", _frozen_array(arr, np.uint8))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class CommitteeRecord:
    """Per-scan expert votes and the derived consensus, if quorum is met."""

    scan_id: str
    votes: dict[str, Verdict] = field(default_factory=dict)
    consensus: Verdict | None = None

    def to_json_dict(self) -> dict:
        return {
            "scan_id": self.scan_id,
            "votes": {expert: v.value for expert, v in self.votes.items()},
            "consensus": self.consensus.value if self.consensus else None,
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "CommitteeRecord":
        return cls(
            scan_id=obj["scan_id"],
            votes={e: Verdict.parse(v) for e, v in obj["votes"].items()},
            consensus=Verdict.parse(obj["consensus"]) if obj.get("consensus") else None,
        )


# -- binary PGM codecs -------------------------------------------------------


def parse_pgm_header(data: bytes) -> tuple[int, int, int, int]:
    """Returns (width, height, maxval, payload_offset).

    Accepts the full PGM header grammar: tokens separated by whitespace,
    '#' comments running to end of line, exactly one whitespace byte
    between maxval and the payload.
    """
    if len(data) < 2 or data[:2] != b"P5":
        raise PgmFormatError("not a binary PGM: missing P5 magic")
    pos = 2
    tokens = []
    while len(tokens) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            eol = data.find(b"\n", pos)
            if eol < 0:
                raise PgmFormatError("unterminated comment in header")
            pos = eol + 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise PgmFormatError("truncated header")
        token = data[start:pos]
        if not token.isdigit():
            raise PgmFormatError(f"non-numeric header token {token!r}")
        tokens.append(int(token))
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise PgmFormatError("missing whitespace after maxval")
    pos += 1
    width, height, maxval = tokens
    if width < 1 or height < 1:
        raise PgmFormatError(f"degenerate dimensions {width}x{height}")
    return width, height, maxval, pos


def read_scan_pgm(data: bytes, scan_id: str = "scan", seam_type: str = "",
                  source: ScanSource = ScanSource.INGESTED) -> RawScan:
    """Decode a 16-bit binary PGM (maxval 65535, big-endian samples)."""
    width, height, maxval, offset = parse_pgm_header(data)
    if maxval != 65535:
        raise PgmFormatError(f"unsupported bit depth: maxval {maxval}, expected 65535")
    expected = width * height * 2
    payload = data[offset : offset + expected]
    if len(payload) < expected:
        raise PgmFormatError(f"truncated payload: expected {expected} bytes, got {len(payload)}")
    pixels = np.frombuffer(payload, dtype=">u2").reshape(height, width).astype(np.uint16)
    return RawScan(id=scan_id, pixels=pixels, seam_type=seam_type, source=source)


def write_scan_pgm(scan: RawScan) -> bytes:
    """Canonical 16-bit binary PGM: no comments, single separators."""
    header = f"P5\n{scan.width} {scan.height}\n65535\n".encode("ascii")
    return header + scan.pixels.astype(">u2").tobytes()


def read_image_pgm(data: bytes, source_scan_id: str = "scan",
                   resize_mode: ResizeMode = ResizeMode.SHRINK,
                   augmentation: Augmentation = Augmentation.NONE) -> ProcessedImage:
    """Decode an 8-bit binary PGM (maxval 255) into a ProcessedImage."""
    width, height, maxval, offset = parse_pgm_header(data)
    if maxval != 255:
        raise PgmFormatError(f"unsupported bit depth: maxval {maxval}, expected 255")
    expected = width * height
    payload = data[offset : offset + expected]
    if len(payload) < expected:
        raise PgmFormatError(f"truncated payload: expected {expected} bytes, got {len(payload)}")
    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(height, width)
    return ProcessedImage(pixels=pixels, resize_mode=resize_mode,
                          source_scan_id=source_scan_id, augmentation=augmentation)


def write_image_pgm(img: ProcessedImage) -> bytes:
    """Canonical 8-bit binary PGM, one byte per sample."""
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + img.pixels.tobytes()
