"""The compact desk-scale classifier behind a backbone-agnostic surface.

The fixed architecture (conv 8@5x5/2, ReLU, pool 2, conv 16@3x3/2,
ReLU, pool 2, conv 32@3x3/1, ReLU, global average pool, dense 2,
softmax) is described by a data-only descriptor, so a different
backbone can be slotted in behind the same forward/classify/save/load
surface. Class index 0 is Faultless, index 1 is Erroneous (the
positive class).

Weights use fan-in-scaled uniform initialization,
U(-1/sqrt(fan_in), 1/sqrt(fan_in)), drawn from the portable RNG;
biases start at zero. Inputs are 8-bit images mapped to [0, 1] by
dividing by 255 at the input layer.
"""

from __future__ import annotations

import math

import numpy as np

from ..rng import PortableRng
from ..scans import ProcessedImage, Verdict
from .layers import Conv2d, Dense, GlobalAvgPool, Layer, MaxPool, ReLU, softmax, softmax_cross_entropy

DESK_ARCHITECTURE = (
    {"kind": "conv", "in_channels": 1, "out_channels": 8, "kernel": 5, "stride": 2},
    {"kind": "relu"},
    {"kind": "maxpool", "size": 2},
    {"kind": "conv", "in_channels": 8, "out_channels": 16, "kernel": 3, "stride": 2},
    {"kind": "relu"},
    {"kind": "maxpool", "size": 2},
    {"kind": "conv", "in_channels": 16, "out_channels": 32, "kernel": 3, "stride": 1},
    {"kind": "relu"},
    {"kind": "gap"},
    {"kind": "dense", "in_features": 32, "out_features": 2},
)

FAULTLESS_INDEX = 0
ERRONEOUS_INDEX = 1


class ArchitectureError(ValueError):
    """Raised when a descriptor cannot be built or does not match weights."""


def build_layers(descriptor, dtype=np.float32) -> list[Layer]:
    layers: list[Layer] = []
    for spec in descriptor:
        kind = spec.get("kind")
        if kind == "conv":
            layers.append(
                Conv2d(spec["in_channels"], spec["out_channels"], spec["kernel"],
                       spec["stride"], dtype=dtype)
            )
        elif kind == "relu":
            layers.append(ReLU())
        elif kind == "maxpool":
            layers.append(MaxPool(spec["size"]))
        elif kind == "gap":
            layers.append(GlobalAvgPool())
        elif kind == "dense":
            layers.append(Dense(spec["in_features"], spec["out_features"], dtype=dtype))
        else:
            raise ArchitectureError(f"unknown layer kind {kind!r}")
    return layers


class Model:
    """Architecture descriptor plus live parameter tensors."""

    def __init__(self, descriptor, dtype=np.float32):
        self.descriptor = tuple(dict(spec) for spec in descriptor)
        self.dtype = np.dtype(dtype)
        self.layers = build_layers(self.descriptor, dtype=self.dtype)
        if self.layers:
            self.layers[0].need_input_grad = False  # nothing below to feed

    # -- parameters --------------------------------------------------------

    def parameters(self) -> list[np.ndarray]:
        return [p for layer in self.layers for p in layer.params]

    def gradients(self) -> list[np.ndarray]:
        return [g for layer in self.layers for g in layer.grads]

    def set_parameters(self, tensors) -> None:
        params = self.parameters()
        if len(tensors) != len(params):
            raise ArchitectureError(f"expected {len(params)} tensors, got {len(tensors)}")
        for dst, src in zip(params, tensors):
            src = np.asarray(src, dtype=dst.dtype)
            if src.shape != dst.shape:
                raise ArchitectureError(f"tensor shape {src.shape} does not match {dst.shape}")
            dst[...] = src

    def copy(self) -> "Model":
        clone = Model(self.descriptor, dtype=self.dtype)
        clone.set_parameters([p.copy() for p in self.parameters()])
        return clone

    def astype(self, dtype) -> "Model":
        clone = Model(self.descriptor, dtype=dtype)
        clone.set_parameters([p.astype(dtype) for p in self.parameters()])
        return clone

    # -- passes --------------------------------------------------------------

    def forward_logits(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        for layer in self.layers:
            x = layer.forward(x, train=train)
        return x

    def backward(self, dlogits: np.ndarray) -> np.ndarray:
        grad = dlogits
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad

    def predict_proba(self, images_u8: np.ndarray) -> np.ndarray:
        """(n, 2) probabilities for a uint8 batch of shape (n, H, W)."""
        x = images_u8.astype(self.dtype)[:, None, :, :] / np.asarray(255, dtype=self.dtype)
        return softmax(self.forward_logits(x))


# Fan-in-scaled uniform bound. The wide gain keeps ReLU activations, and
# with them the gradient flow through the global average pool, from
# shrinking layer to layer; smaller gains leave the pooled features so
# small that plain fixed-rate SGD stalls for tens of epochs.
_INIT_GAIN = 6.0


def init_model(seed: int, descriptor=DESK_ARCHITECTURE, dtype=np.float32) -> Model:
    """Seeded model; same seed gives byte-identical weights."""
    model = Model(descriptor, dtype=dtype)
    rng = PortableRng(seed)
    for layer in model.layers:
        if isinstance(layer, Conv2d):
            fan_in = layer.in_channels * layer.kernel * layer.kernel
            bound = _INIT_GAIN / math.sqrt(fan_in)
            layer.w[...] = rng.uniform(-bound, bound, layer.w.size).reshape(layer.w.shape)
        elif isinstance(layer, Dense):
            bound = _INIT_GAIN / math.sqrt(layer.in_features)
            layer.w[...] = rng.uniform(-bound, bound, layer.w.size).reshape(layer.w.shape)
    return model


def forward(model: Model, img: ProcessedImage) -> tuple[float, float]:
    """Probability pair (faultless, erroneous) for one image."""
    probs = model.predict_proba(img.pixels[None, :, :])[0]
    return float(probs[FAULTLESS_INDEX]), float(probs[ERRONEOUS_INDEX])


def classify(model: Model, img: ProcessedImage, threshold: float = 0.5) -> Verdict:
    """Erroneous iff its probability reaches the threshold (ties go Erroneous)."""
    if not (0.0 < threshold < 1.0):
        raise ValueError(f"threshold must be in (0, 1), got {threshold}")
    _, p_err = forward(model, img)
    return Verdict.ERRONEOUS if p_err >= threshold else Verdict.FAULTLESS


def loss_and_gradients(model: Model, batch) -> tuple[float, list[np.ndarray]]:
    """Mean cross-entropy over (ProcessedImage, Verdict) pairs, with
    backpropagated gradients in parameter order."""
    if not batch:
        raise ValueError("empty batch")
    images = np.stack([img.pixels for img, _ in batch])
    targets = np.array(
        [ERRONEOUS_INDEX if v is Verdict.ERRONEOUS else FAULTLESS_INDEX for _, v in batch],
        dtype=np.int64,
    )
    x = images.astype(model.dtype)[:, None, :, :] / np.asarray(255, dtype=model.dtype)
    logits = model.forward_logits(x, train=True)
    loss, dlogits, _ = softmax_cross_entropy(logits, targets)
    model.backward(dlogits)
    return loss, [g.copy() for g in model.gradients()]
