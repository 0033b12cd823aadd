import numpy as np
import pytest

from wsqa.cnn.model import (
    DESK_ARCHITECTURE,
    Model,
    classify,
    forward,
    init_model,
    loss_and_gradients,
)
from wsqa.cnn.serialize import (
    ModelFormatError,
    load_model,
    save_model,
)
from wsqa.cnn.layers import Dense
from wsqa.rng import PortableRng
from wsqa.scans import ProcessedImage, ResizeMode, Verdict

from oracles import conv_forward_reference


def random_image(seed=0):
    rng = np.random.default_rng(seed)
    return ProcessedImage(
        pixels=rng.integers(0, 256, (299, 299), dtype=np.uint8),
        resize_mode=ResizeMode.SHRINK,
        source_scan_id=f"img{seed}",
    )


class TestInitModel:
    def test_same_seed_byte_identical(self):
        assert save_model(init_model(42)) == save_model(init_model(42))

    def test_different_seeds_differ(self):
        assert save_model(init_model(1)) != save_model(init_model(2))

    def test_parameters_finite_and_biases_zero(self):
        model = init_model(7)
        for p in model.parameters():
            assert np.isfinite(p).all()
        for layer in model.layers:
            if layer.params:
                assert not layer.params[1].any()

    def test_desk_architecture_shapes(self):
        model = init_model(0)
        shapes = [p.shape for p in model.parameters()]
        assert shapes == [
            (8, 1, 5, 5), (8,),
            (16, 8, 3, 3), (16,),
            (32, 16, 3, 3), (32,),
            (32, 2), (2,),
        ]


class TestForward:
    def test_probabilities_sum_to_one(self):
        model = init_model(3)
        p_f, p_e = forward(model, random_image(1))
        assert 0.0 <= p_f <= 1.0 and 0.0 <= p_e <= 1.0
        assert p_f + p_e == pytest.approx(1.0, abs=1e-6)

    def test_zero_dense_gives_even_split(self):
        model = init_model(3)
        dense = [l for l in model.layers if isinstance(l, Dense)][0]
        dense.w[...] = 0.0
        p_f, p_e = forward(model, random_image(2))
        assert (p_f, p_e) == (0.5, 0.5)

    def test_deterministic(self):
        model = init_model(5)
        img = random_image(4)
        assert forward(model, img) == forward(model, img)

    def test_toy_network_matches_reference(self):
        desc = (
            {"kind": "conv", "in_channels": 1, "out_channels": 2, "kernel": 3, "stride": 1},
            {"kind": "relu"},
            {"kind": "gap"},
            {"kind": "dense", "in_features": 2, "out_features": 2},
        )
        model = init_model(9, descriptor=desc, dtype=np.float64)
        conv, _, _, dense = model.layers
        rng = PortableRng(11)
        x = rng.random(16).reshape(1, 1, 4, 4)
        ref_conv = conv_forward_reference(x[0], conv.w, conv.b, 1)
        ref_feat = np.maximum(ref_conv, 0.0).mean(axis=(1, 2))
        ref_logits = ref_feat @ dense.w + dense.b
        got = model.forward_logits(x)
        assert np.allclose(got[0], ref_logits, atol=1e-6)


class TestClassify:
    def test_threshold_rule(self):
        model = init_model(3)
        img = random_image(5)
        _, p_e = forward(model, img)
        below = classify(model, img, threshold=min(0.99, p_e + 0.01))
        at = classify(model, img, threshold=p_e)  # ties go Erroneous
        assert below is Verdict.FAULTLESS
        assert at is Verdict.ERRONEOUS

    def test_threshold_sweep_monotone(self):
        model = init_model(3)
        img = random_image(6)
        calls = [classify(model, img, threshold=t) for t in (0.1, 0.3, 0.5, 0.7, 0.9)]
        seen_faultless = False
        for verdict in calls:
            if verdict is Verdict.FAULTLESS:
                seen_faultless = True
            else:
                assert not seen_faultless  # once Faultless, raising t never flips back

    def test_threshold_bounds(self):
        with pytest.raises(ValueError):
            classify(init_model(0), random_image(0), threshold=0.0)


class TestLossAndGradients:
    def test_uniform_predictions_loss_ln2(self):
        model = init_model(3)
        for layer in model.layers:
            for p in layer.params:
                p[...] = 0.0
        batch = [(random_image(i), Verdict.FAULTLESS) for i in range(4)]
        loss, grads = loss_and_gradients(model, batch)
        assert loss == pytest.approx(np.log(2.0), abs=1e-6)
        assert len(grads) == len(model.parameters())

    def test_empty_batch_rejected(self):
        with pytest.raises(ValueError):
            loss_and_gradients(init_model(0), [])

    def test_perfect_confidence_loss_near_zero(self):
        desc = ({"kind": "gap"}, {"kind": "dense", "in_features": 1, "out_features": 2})
        model = Model(desc, dtype=np.float64)
        dense = model.layers[1]
        dense.w[...] = [[-300.0, 300.0]]
        img = ProcessedImage(pixels=np.full((299, 299), 255, dtype=np.uint8),
                             resize_mode=ResizeMode.SHRINK, source_scan_id="x")
        loss, _ = loss_and_gradients(model, [(img, Verdict.ERRONEOUS)])
        assert loss < 1e-10


class TestSerialization:
    def test_round_trip_bit_exact(self):
        model = init_model(21)
        again = load_model(save_model(model))
        assert again.descriptor == model.descriptor
        for a, b in zip(model.parameters(), again.parameters()):
            assert np.array_equal(a, b)

    def test_truncated_file_rejected(self):
        data = save_model(init_model(2))
        with pytest.raises(ModelFormatError, match="length mismatch"):
            load_model(data[:-8])

    def test_trailing_bytes_rejected(self):
        data = save_model(init_model(2))
        with pytest.raises(ModelFormatError, match="trailing"):
            load_model(data + b"\x00\x00\x00\x00")

    def test_bad_magic_rejected(self):
        data = save_model(init_model(2))
        with pytest.raises(ModelFormatError, match="magic"):
            load_model(b"XXXX" + data[4:])

    def test_bad_version_rejected(self):
        data = bytearray(save_model(init_model(2)))
        data[4] = 99
        with pytest.raises(ModelFormatError, match="version"):
            load_model(bytes(data))

    def test_non_finite_weights_rejected(self):
        model = init_model(2)
        model.layers[0].w[0, 0, 0, 0] = np.nan
        with pytest.raises(ModelFormatError, match="non-finite"):
            save_model(model)
        # and on the load side, with bytes patched to contain inf
        good = init_model(2)
        data = bytearray(save_model(good))
        inf = np.array([np.inf], dtype="<f4").tobytes()
        offset = len(data) - 4
        data[offset:offset + 4] = inf
        with pytest.raises(ModelFormatError, match="non-finite"):
            load_model(bytes(data))

    def test_format_is_little_endian_f32(self):
        model = init_model(4)
        data = save_model(model)
        assert data[:4] == b"WSQA"
        total_params = sum(p.size for p in model.parameters())
        assert data.endswith(np.ascontiguousarray(model.parameters()[-1], dtype="<f4").tobytes())
        header_len = len(data) - 4 * total_params
        assert header_len > 12
