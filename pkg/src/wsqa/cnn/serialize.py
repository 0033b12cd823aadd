"""Versioned binary model format.

Layout: magic "WSQA", little-endian uint32 format version, uint32 JSON
descriptor length, the UTF-8 architecture descriptor, then every
parameter tensor (per layer: weights then bias) as raw little-endian
float32 in layer order. Load is strict: bad magic, unknown version,
length mismatch, trailing bytes, and non-finite weights are all errors.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .model import Model

MAGIC = b"WSQA"
FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    """Raised for malformed or corrupt model files."""


def save_model(model: Model) -> bytes:
    for p in model.parameters():
        if not np.isfinite(p).all():
            raise ModelFormatError("refusing to serialize non-finite weights")
    descriptor = json.dumps(list(model.descriptor), separators=(",", ":")).encode("utf-8")
    parts = [MAGIC, struct.pack("<II", FORMAT_VERSION, len(descriptor)), descriptor]
    for p in model.parameters():
        parts.append(np.ascontiguousarray(p, dtype="<f4").tobytes())
    return b"".join(parts)


def load_model(data: bytes) -> Model:
    if len(data) < 12 or data[:4] != MAGIC:
        raise ModelFormatError("bad magic: not a WSQA model file")
    version, desc_len = struct.unpack("<II", data[4:12])
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported format version {version}")
    if len(data) < 12 + desc_len:
        raise ModelFormatError("truncated descriptor")
    try:
        descriptor = json.loads(data[12 : 12 + desc_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"unreadable descriptor: {exc}") from exc

    model = Model(descriptor, dtype=np.float32)
    offset = 12 + desc_len
    tensors = []
    for p in model.parameters():
        nbytes = p.size * 4
        chunk = data[offset : offset + nbytes]
        if len(chunk) < nbytes:
            raise ModelFormatError(
                f"length mismatch: tensor needs {nbytes} bytes, {len(chunk)} remain"
            )
        tensors.append(np.frombuffer(chunk, dtype="<f4").reshape(p.shape))
        offset += nbytes
    if offset != len(data):
        raise ModelFormatError(f"{len(data) - offset} trailing bytes after tensors")
    for t in tensors:
        if not np.isfinite(t).all():
            raise ModelFormatError("non-finite weights in model file")
    model.set_parameters(tensors)
    return model


def save_model_file(model: Model, path) -> None:
    with open(path, "wb") as fh:
        fh.write(save_model(model))


def load_model_file(path) -> Model:
    with open(path, "rb") as fh:
        return load_model(fh.read())
