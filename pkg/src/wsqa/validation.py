"""Input validation helpers shared by the estimators and the service.

These normalize the accepted input spellings (domain objects, numpy
arrays, nested sequences) into canonical arrays, raising ValueError with
a usable message instead of letting shape errors surface deep inside the
numeric code.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence

import numpy as np

from .scans import NETWORK_INPUT_SIZE, ProcessedImage, RawScan, Verdict


def as_image_array(X) -> np.ndarray:
    """Coerce to a uint8 batch of shape (n, 299, 299).

    Accepts a single ProcessedImage, an iterable of ProcessedImage, or an
    array-like of shape (299, 299) or (n, 299, 299).
    """
    if isinstance(X, ProcessedImage):
        return X.pixels[None, :, :]
    if isinstance(X, np.ndarray):
        arr = X
    elif isinstance(X, Sequence) or isinstance(X, Iterable):
        items = list(X)
        if not items:
            raise ValueError("empty image batch")
        if all(isinstance(i, ProcessedImage) for i in items):
            return np.stack([i.pixels for i in items])
        arr = np.asarray(items)
    else:
        raise ValueError(f"cannot interpret {type(X).__name__} as an image batch")
    if arr.ndim == 2:
        arr = arr[None, :, :]
    if arr.ndim != 3 or arr.shape[1:] != (NETWORK_INPUT_SIZE, NETWORK_INPUT_SIZE):
        raise ValueError(
            f"expected images of shape (n, {NETWORK_INPUT_SIZE}, {NETWORK_INPUT_SIZE}), got {arr.shape}"
        )
    if arr.dtype != np.uint8:
        if not np.issubdtype(arr.dtype, np.integer) or arr.min() < 0 or arr.max() > 255:
            raise ValueError("image pixels must be integers in [0, 255]")
        arr = arr.astype(np.uint8)
    return arr


def as_label_array(y, n: int | None = None) -> np.ndarray:
    """Coerce labels to an int array: 0 = Faultless, 1 = Erroneous.

    Accepts Verdict values, their string spellings, or 0/1 integers.
    """
    labels = []
    for item in y:
        if isinstance(item, Verdict):
            labels.append(1 if item is Verdict.ERRONEOUS else 0)
        elif isinstance(item, str):
            labels.append(1 if Verdict.parse(item) is Verdict.ERRONEOUS else 0)
        elif isinstance(item, (int, np.integer)):
            if item not in (0, 1):
                raise ValueError(f"integer labels must be 0 or 1, got {item}")
            labels.append(int(item))
        else:
            raise ValueError(f"cannot interpret {item!r} as a verdict")
    out = np.asarray(labels, dtype=np.int64)
    if n is not None and len(out) != n:
        raise ValueError(f"got {len(out)} labels for {n} images")
    return out


def as_scan_list(X) -> list[RawScan]:
    if isinstance(X, RawScan):
        return [X]
    scans = list(X)
    if not scans:
        raise ValueError("empty scan batch")
    for s in scans:
        if not isinstance(s, RawScan):
            raise ValueError(f"expected RawScan items, got {type(s).__name__}")
    return scans
