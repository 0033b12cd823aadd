import numpy as np
import pytest

from wsqa.cnn.layers import Conv2d, Dense, GlobalAvgPool, MaxPool, ReLU, softmax, softmax_cross_entropy
from wsqa.rng import PortableRng

from oracles import conv_forward_reference, finite_difference_gradients, relative_error


def rand(shape, seed, scale=1.0):
    rng = PortableRng(seed)
    return scale * (rng.random(int(np.prod(shape))).reshape(shape) - 0.5)


class TestConvForward:
    @pytest.mark.parametrize("stride,kernel,in_ch,out_ch", [
        (1, 3, 1, 2), (2, 3, 2, 3), (2, 5, 1, 4), (3, 3, 3, 2),
    ])
    def test_matches_reference(self, stride, kernel, in_ch, out_ch):
        layer = Conv2d(in_ch, out_ch, kernel, stride, dtype=np.float64)
        layer.w[...] = rand(layer.w.shape, 1)
        layer.b[...] = rand(layer.b.shape, 2)
        x = rand((2, in_ch, 11, 13), 3)
        out = layer.forward(x)
        for i in range(2):
            ref = conv_forward_reference(x[i], layer.w, layer.b, stride)
            assert np.allclose(out[i], ref, atol=1e-12)

    def test_output_shape(self):
        layer = Conv2d(1, 8, 5, 2)
        assert layer.forward(np.zeros((1, 1, 299, 299), dtype=np.float32)).shape == (1, 8, 148, 148)


class TestMaxPool:
    def test_values_and_tie_routing(self):
        x = np.array([[[[1.0, 2.0, 5.0, 5.0],
                        [3.0, 4.0, 5.0, 5.0],
                        [7.0, 7.0, 0.0, 1.0],
                        [7.0, 7.0, 2.0, 0.0]]]])
        layer = MaxPool(2)
        out = layer.forward(x, train=True)
        assert np.array_equal(out[0, 0], [[4.0, 5.0], [7.0, 2.0]])
        grad = np.ones_like(out)
        gx = layer.backward(grad)
        # ties route to the first window position only
        assert gx[0, 0, 0, 2] == 1.0 and gx[0, 0, 0, 3] == 0.0
        assert gx[0, 0, 2, 0] == 1.0 and gx[0, 0, 2, 1] == 0.0
        assert gx.sum() == grad.sum()

    def test_odd_remainder_cropped(self):
        layer = MaxPool(2)
        out = layer.forward(np.zeros((1, 1, 5, 7), dtype=np.float32))
        assert out.shape == (1, 1, 2, 3)


class TestSoftmax:
    def test_probability_simplex(self):
        logits = rand((50, 2), 7, scale=20.0)
        probs = softmax(logits)
        assert (probs >= 0).all()
        assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-6)

    def test_uniform_loss_is_ln2(self):
        loss, _, probs = softmax_cross_entropy(np.zeros((8, 2)), np.zeros(8, dtype=np.int64))
        assert loss == pytest.approx(np.log(2.0), abs=1e-12)
        assert np.allclose(probs, 0.5)

    def test_confident_correct_loss_near_zero(self):
        logits = np.array([[30.0, -30.0], [-30.0, 30.0]])
        loss, _, _ = softmax_cross_entropy(logits, np.array([0, 1]))
        assert loss < 1e-12

    def test_duplicated_batch_mean_invariance(self):
        logits = rand((4, 2), 9, scale=3.0)
        y = np.array([0, 1, 1, 0])
        loss_once, _, _ = softmax_cross_entropy(logits, y)
        loss_tiled, _, _ = softmax_cross_entropy(np.tile(logits, (3, 1)), np.tile(y, 3))
        assert loss_tiled == pytest.approx(loss_once, rel=1e-12)


def _layer_param_gradcheck(layers, x, targets, step=1e-5):
    """Analytic vs central-difference gradients for every parameter of a
    small stack, driven through the softmax cross-entropy loss."""

    def loss_fn():
        a = x
        for layer in layers:
            a = layer.forward(a)
        return softmax_cross_entropy(a, targets)[0]

    a = x
    for layer in layers:
        a = layer.forward(a, train=True)
    loss, dlogits, _ = softmax_cross_entropy(a, targets)
    grad = dlogits
    for layer in reversed(layers):
        grad = layer.backward(grad)

    params = [p for layer in layers for p in layer.params]
    analytic = [g.copy() for layer in layers for g in layer.grads]
    numeric = finite_difference_gradients(loss_fn, params, step=step)
    return [(a, n) for a, n in zip(analytic, numeric)]


def _margin_ok(layers, x, margin=2e-4):
    """Reject configurations near ReLU kinks or pool near-ties, where a
    1e-5 parameter step can flip a unit and invalidate the central
    difference. Exact zero ties in pool windows are clamped ReLU
    outputs; a perturbation below the ReLU margin cannot move them, so
    they are safe."""
    a = x
    for layer in layers:
        if isinstance(layer, ReLU) and np.abs(a).min() < margin:
            return False
        if isinstance(layer, MaxPool):
            srt = np.sort(layer._stack(a), axis=0)
            gap = srt[-1] - srt[-2]
            near = (gap < margin) & ~((gap == 0.0) & (srt[-1] == 0.0))
            if near.any():
                return False
        a = layer.forward(a)
    return True


def small_stack(seed):
    """Randomized small config touching every layer kind."""
    rng = PortableRng(seed)
    in_ch = 1 + rng.randbelow(2)
    mid_ch = 2 + rng.randbelow(2)
    stride = 1 + rng.randbelow(2)
    layers = [
        Conv2d(in_ch, mid_ch, 3, stride, dtype=np.float64),
        ReLU(),
        MaxPool(2),
        Conv2d(mid_ch, 3, 3, 1, dtype=np.float64),
        ReLU(),
        GlobalAvgPool(),
        Dense(3, 2, dtype=np.float64),
    ]
    for i, layer in enumerate(layers):
        if layer.params:
            layer.params[0][...] = rand(layer.params[0].shape, seed * 31 + i, scale=1.5)
            layer.params[1][...] = rand(layer.params[1].shape, seed * 37 + i, scale=0.3)
    n = 2 + rng.randbelow(3)
    size = 15 + rng.randbelow(5)  # keeps every feature map non-empty at stride 2
    x = rand((n, in_ch, size, size), seed * 41, scale=2.0)
    targets = np.array([rng.randbelow(2) for _ in range(n)], dtype=np.int64)
    return layers, x, targets


def safe_stack(seed):
    """A small_stack draw with kink margins, redrawn deterministically."""
    for attempt in range(30):
        layers, x, targets = small_stack(seed + 1000 * attempt)
        if _margin_ok(layers, x):
            return layers, x, targets
    raise AssertionError(f"no kink-safe configuration found for seed {seed}")


@pytest.mark.parametrize("seed", range(1, 21))
def test_gradients_match_finite_differences(seed):
    # 20 randomized configurations touching every layer kind
    layers, x, targets = safe_stack(seed)
    for analytic, numeric in _layer_param_gradcheck(layers, x, targets):
        assert relative_error(analytic, numeric) < 1e-5


def test_dense_and_gap_gradients_standalone():
    layers = [GlobalAvgPool(), Dense(3, 2, dtype=np.float64)]
    layers[1].w[...] = rand(layers[1].w.shape, 5)
    layers[1].b[...] = rand(layers[1].b.shape, 6)
    x = rand((4, 3, 6, 6), 7)
    targets = np.array([0, 1, 0, 1])
    for analytic, numeric in _layer_param_gradcheck(layers, x, targets):
        assert relative_error(analytic, numeric) < 1e-7
