"""Network layers with explicit forward/backward passes.

Everything is plain numpy, organized so the heavy convolutions run as
single GEMMs: the im2col buffer is laid out one kernel tap per row
(contiguous writes from strided reads), the product `W @ AT` never
transposes the big operand, and the backward scatter walks the same
tap rows with fixed-order strided adds, keeping results deterministic.
A layer flagged with ``need_input_grad = False`` (the network's first
layer) skips its input-gradient pass entirely.

Layers are dtype-generic: float32 for training speed, float64 for
finite-difference gradient verification.
"""

from __future__ import annotations

import numpy as np


class Layer:
    """Base: stateless unless it carries parameters."""

    params: list[np.ndarray]
    grads: list[np.ndarray]
    need_input_grad: bool

    def __init__(self):
        self.params = []
        self.grads = []
        self.need_input_grad = True

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad: np.ndarray) -> np.ndarray | None:
        raise NotImplementedError


class Conv2d(Layer):
    """Valid (unpadded) 2-D convolution, square kernel, square stride."""

    def __init__(self, in_channels: int, out_channels: int, kernel: int, stride: int,
                 dtype=np.float32):
        super().__init__()
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel = kernel
        self.stride = stride
        self.w = np.zeros((out_channels, in_channels, kernel, kernel), dtype=dtype)
        self.b = np.zeros(out_channels, dtype=dtype)
        self.gw = np.zeros_like(self.w)
        self.gb = np.zeros_like(self.b)
        self.params = [self.w, self.b]
        self.grads = [self.gw, self.gb]
        self._cols = None
        self._inshape = None

    def _out_size(self, h: int, w: int) -> tuple[int, int]:
        k, s = self.kernel, self.stride
        return (h - k) // s + 1, (w - k) // s + 1

    def _im2col(self, x: np.ndarray) -> np.ndarray:
        """(c*k*k, n*oh*ow) tap-major buffer; row i holds one kernel tap."""
        n, c, h, w = x.shape
        k, s = self.kernel, self.stride
        oh, ow = self._out_size(h, w)
        cols = np.empty((c * k * k, n * oh * ow), dtype=x.dtype)
        row = 0
        for ci in range(c):
            for ki in range(k):
                for kj in range(k):
                    cols[row].reshape(n, oh, ow)[...] = x[:, ci, ki : ki + s * oh : s, kj : kj + s * ow : s]
                    row += 1
        return cols

    def forward(self, x, train=False):
        n = x.shape[0]
        oh, ow = self._out_size(x.shape[2], x.shape[3])
        cols = self._im2col(x)
        y = self.w.reshape(self.out_channels, -1) @ cols
        out = np.ascontiguousarray(y.reshape(self.out_channels, n, oh, ow).transpose(1, 0, 2, 3))
        out += self.b[None, :, None, None]
        if train:
            self._cols = cols
            self._inshape = x.shape
        return out

    def backward(self, grad):
        n, _, oh, ow = grad.shape
        k, s = self.kernel, self.stride
        dy = np.ascontiguousarray(grad.transpose(1, 0, 2, 3)).reshape(self.out_channels, -1)
        self.gw[...] = (dy @ self._cols.T).reshape(self.w.shape)
        self.gb[...] = dy.sum(axis=1)
        self._cols = None
        if not self.need_input_grad:
            self._inshape = None
            return None
        dcols = self.w.reshape(self.out_channels, -1).T @ dy
        gx = np.zeros(self._inshape, dtype=grad.dtype)
        self._inshape = None
        row = 0
        for ci in range(gx.shape[1]):
            for ki in range(k):
                for kj in range(k):
                    gx[:, ci, ki : ki + s * oh : s, kj : kj + s * ow : s] += dcols[row].reshape(n, oh, ow)
                    row += 1
        return gx


class ReLU(Layer):
    def __init__(self):
        super().__init__()
        self._out = None

    def forward(self, x, train=False):
        out = np.maximum(x, 0)
        if train:
            self._out = out
        return out

    def backward(self, grad):
        gx = np.where(self._out > 0, grad, 0)
        self._out = None
        return gx


class MaxPool(Layer):
    """Max pooling with window == stride; trailing remainder is cropped.

    Ties within a window route the gradient to the first position in
    row-major window order, never to both.
    """

    def __init__(self, size: int = 2):
        super().__init__()
        self.size = size
        self._idx = None
        self._inshape = None

    def _stack(self, x):
        n, c, h, w = x.shape
        p = self.size
        h2, w2 = h // p, w // p
        xr = x[:, :, : h2 * p, : w2 * p].reshape(n, c, h2, p, w2, p)
        stack = np.empty((p * p, n, c, h2, w2), dtype=x.dtype)
        for pi in range(p):
            for pj in range(p):
                stack[pi * p + pj] = xr[:, :, :, pi, :, pj]
        return stack

    def forward(self, x, train=False):
        stack = self._stack(x)
        out = stack.max(axis=0)
        if train:
            self._idx = stack.argmax(axis=0)
            self._inshape = x.shape
        return out

    def backward(self, grad):
        n, c, h, w = self._inshape
        p = self.size
        h2, w2 = h // p, w // p
        routed = np.zeros((p * p, n, c, h2, w2), dtype=grad.dtype)
        np.put_along_axis(routed, self._idx[None], grad[None], axis=0)
        gx = np.zeros(self._inshape, dtype=grad.dtype)
        gxr = gx[:, :, : h2 * p, : w2 * p].reshape(n, c, h2, p, w2, p)
        for pi in range(p):
            for pj in range(p):
                gxr[:, :, :, pi, :, pj] = routed[pi * p + pj]
        self._idx = None
        self._inshape = None
        return gx


class GlobalAvgPool(Layer):
    def __init__(self):
        super().__init__()
        self._inshape = None

    def forward(self, x, train=False):
        if train:
            self._inshape = x.shape
        return x.mean(axis=(2, 3))

    def backward(self, grad):
        n, c, h, w = self._inshape
        gx = np.broadcast_to((grad / (h * w))[:, :, None, None], (n, c, h, w)).copy()
        self._inshape = None
        return gx


class Dense(Layer):
    def __init__(self, in_features: int, out_features: int, dtype=np.float32):
        super().__init__()
        self.in_features = in_features
        self.out_features = out_features
        self.w = np.zeros((in_features, out_features), dtype=dtype)
        self.b = np.zeros(out_features, dtype=dtype)
        self.gw = np.zeros_like(self.w)
        self.gb = np.zeros_like(self.b)
        self.params = [self.w, self.b]
        self.grads = [self.gw, self.gb]
        self._x = None

    def forward(self, x, train=False):
        if train:
            self._x = x
        return x @ self.w + self.b

    def backward(self, grad):
        self.gw[...] = self._x.T @ grad
        self.gb[...] = grad.sum(axis=0)
        self._x = None
        if not self.need_input_grad:
            return None
        return grad @ self.w.T


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def softmax_cross_entropy(logits: np.ndarray, targets: np.ndarray,
                          sample_weights: np.ndarray | None = None):
    """(Weighted) mean cross-entropy and its gradient w.r.t. the logits.

    Returns (loss, dlogits, probs). Log-probabilities come from a
    log-sum-exp, so confident correct predictions drive the loss to 0
    without underflow surprises. With ``sample_weights`` the loss is the
    weighted mean sum(w_i * ce_i) / sum(w_i).
    """
    n = logits.shape[0]
    z = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(z).sum(axis=1, keepdims=True))
    logp = z - log_norm
    probs = np.exp(logp)
    ce = -logp[np.arange(n), targets]
    dlogits = probs.copy()
    dlogits[np.arange(n), targets] -= 1.0
    if sample_weights is None:
        loss = float(ce.mean())
        dlogits /= n
    else:
        total = float(sample_weights.sum())
        loss = float((sample_weights * ce).sum() / total)
        dlogits *= (sample_weights / total)[:, None]
    return loss, dlogits.astype(logits.dtype), probs
