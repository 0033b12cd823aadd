import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wsqa.preprocess import (
    PreprocessConfig,
    ScanPreprocessor,
    normalize_and_gamma,
    quantize_8bit,
    resize_bicubic,
    scale_geometry,
    to_network_input,
)
from wsqa.rng import PortableRng
from wsqa.scans import Augmentation, RawScan, ResizeMode

from oracles import bicubic_resize_reference


def make_scan(pixels, scan_id="s"):
    return RawScan(id=scan_id, pixels=np.asarray(pixels, dtype=np.uint16))


def random_scan(seed, w, h, scan_id="s"):
    rng = PortableRng(seed)
    values = (rng.u64_block(w * h) % np.uint64(65536)).astype(np.uint16).reshape(h, w)
    if not values.any():
        values[0, 0] = 1
    return RawScan(id=scan_id, pixels=values)


class TestNormalizeAndGamma:
    def test_constant_scan_maps_to_one(self):
        out = normalize_and_gamma(make_scan(np.full((3, 4), 4096)), 0.7)
        assert np.array_equal(out, np.ones((3, 4)))

    def test_half_maximum_value(self):
        # 0.5^0.7 computed to 30 digits with mpmath: 0.615572206...
        from mpmath import mp, mpf, power

        mp.dps = 30
        expected = float(power(mpf(1) / 2, mpf(7) / 10))
        out = normalize_and_gamma(make_scan([[2048, 4096]]), 0.7)
        assert out[0, 1] == 1.0
        assert out[0, 0] == pytest.approx(expected, abs=1e-12)
        assert out[0, 0] == pytest.approx(0.615572, abs=1e-6)

    def test_gamma_one_is_plain_normalization(self):
        scan = random_scan(3, 8, 5)
        out = normalize_and_gamma(scan, 1.0)
        assert np.array_equal(out, scan.pixels / scan.pixels.max())

    def test_maximum_always_one(self):
        out = normalize_and_gamma(random_scan(9, 17, 6), 0.7)
        assert out.max() == 1.0

    def test_rejects_nonpositive_gamma(self):
        with pytest.raises(ValueError):
            normalize_and_gamma(make_scan([[1]]), 0.0)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32))
    def test_gamma_normalize_commutation(self, seed):
        # (x/m)^g == x^g / m^g for the monotone power map; the 8-bit
        # pipeline output is identical whichever order runs first.
        scan = random_scan(seed, 12, 7)
        gamma_then_norm = scan.pixels.astype(np.float64) ** 0.7
        gamma_then_norm /= gamma_then_norm.max()
        norm_then_gamma = normalize_and_gamma(scan, 0.7)
        assert np.allclose(norm_then_gamma, gamma_then_norm, rtol=1e-13, atol=0)
        assert np.array_equal(quantize_8bit(norm_then_gamma), quantize_8bit(gamma_then_norm))


class TestQuantize8Bit:
    def test_endpoints(self):
        out = quantize_8bit(np.array([[0.0, 1.0]]))
        assert list(out[0]) == [0, 255]

    def test_half_rounds_away_from_zero(self):
        assert quantize_8bit(np.array([[0.5]]))[0, 0] == 128  # 127.5 -> 128

    def test_monotone(self):
        a = np.linspace(0, 1, 1000)
        b = np.clip(a + 1e-3, 0, 1)
        qa, qb = quantize_8bit(a), quantize_8bit(b)
        assert (qa <= qb).all()

    def test_clamps_sub_ulp_excursions(self):
        out = quantize_8bit(np.array([[-1e-12, 1.0 + 1e-12]]))
        assert list(out[0]) == [0, 255]


class TestResizeBicubic:
    def test_constant_image_stays_constant(self):
        grid = np.full((7, 11), 131, dtype=np.uint8)
        assert np.array_equal(resize_bicubic(grid, 5, 9), np.full((9, 5), 131))

    def test_identity_size_is_identity(self):
        rng = np.random.default_rng(0)
        grid = rng.integers(0, 256, (9, 13), dtype=np.uint8)
        assert np.array_equal(resize_bicubic(grid, 13, 9), grid)

    def test_4x4_ramp_downsize_matches_oracle(self):
        grid = (np.arange(16, dtype=np.uint8) * 16).reshape(4, 4)
        ours = resize_bicubic(grid, 2, 2)
        ref = bicubic_resize_reference(grid, 2, 2)
        assert np.max(np.abs(ours.astype(int) - ref.astype(int))) <= 1

    @pytest.mark.parametrize("seed", range(12))
    def test_random_grids_match_oracle(self, seed):
        rng = np.random.default_rng(seed)
        h, w = rng.integers(2, 14, 2)
        out_w, out_h = rng.integers(1, 17, 2)
        grid = rng.integers(0, 256, (h, w), dtype=np.uint8)
        ours = resize_bicubic(grid, int(out_w), int(out_h))
        ref = bicubic_resize_reference(grid, int(out_w), int(out_h))
        assert np.max(np.abs(ours.astype(int) - ref.astype(int))) <= 1

    def test_rejects_degenerate_source(self):
        with pytest.raises(ValueError):
            resize_bicubic(np.zeros((1, 5), dtype=np.uint8), 3, 3)


class TestToNetworkInput:
    def test_shrink_geometry(self):
        scan = random_scan(1, 1600, 200)
        img = to_network_input(scan, PreprocessConfig(mode=ResizeMode.SHRINK))
        assert img.pixels.shape == (299, 299)
        assert img.resize_mode is ResizeMode.SHRINK
        assert img.source_scan_id == scan.id
        assert img.augmentation is Augmentation.NONE

    def test_scale_geometry_content_rows(self):
        # 1600x200 with factor 299/1600: content 299x37 centered at rows 131..167
        assert scale_geometry(1600, 200, 299) == (299, 37, 0, 131)
        scan = random_scan(2, 1600, 200)
        img = to_network_input(scan, PreprocessConfig(mode=ResizeMode.SCALE, pad_value=0))
        nonpad = np.where(img.pixels.any(axis=1))[0]
        assert nonpad.min() >= 131 and nonpad.max() <= 167
        assert np.count_nonzero(img.pixels[:131]) == 0
        assert np.count_nonzero(img.pixels[168:]) == 0

    def test_square_input_modes_agree(self):
        scan = random_scan(3, 299, 299)
        shrink = to_network_input(scan, PreprocessConfig(mode=ResizeMode.SHRINK))
        scale = to_network_input(scan, PreprocessConfig(mode=ResizeMode.SCALE))
        assert np.array_equal(shrink.pixels, scale.pixels)

    def test_scale_preserves_aspect_ratio_within_rounding(self):
        for w, h in [(1600, 200), (1200, 500), (700, 123), (500, 499)]:
            cw, ch, _, _ = scale_geometry(w, h, 299)
            # half-pixel rounding of the scaled short side bounds the skew
            f = 299 / max(w, h)
            assert abs(cw - w * f) <= 0.5
            assert abs(ch - h * f) <= 0.5

    def test_pad_value_fills_border(self):
        scan = random_scan(4, 1600, 200)
        img = to_network_input(scan, PreprocessConfig(mode=ResizeMode.SCALE, pad_value=17))
        assert (img.pixels[0] == 17).all() and (img.pixels[-1] == 17).all()

    def test_target_override_requires_flag(self):
        with pytest.raises(ValueError, match="allow_target_override"):
            PreprocessConfig(target=128)
        cfg = PreprocessConfig(target=128, allow_target_override=True)
        with pytest.raises(ValueError, match="network_array"):
            to_network_input(random_scan(5, 64, 32), cfg)


class TestScanPreprocessor:
    def test_transform_batch(self):
        scans = [random_scan(i, 320, 40, scan_id=f"s{i}") for i in range(3)]
        pre = ScanPreprocessor(mode="scale", gamma=0.7)
        images = pre.fit_transform(scans)
        assert [img.source_scan_id for img in images] == ["s0", "s1", "s2"]
        assert all(img.resize_mode is ResizeMode.SCALE for img in images)

    def test_get_params_round_trip(self):
        pre = ScanPreprocessor(mode="shrink", gamma=0.9, pad_value=3)
        params = pre.get_params()
        assert params == {"mode": "shrink", "gamma": 0.9, "pad_value": 3}
        clone = ScanPreprocessor(**params)
        assert clone.get_params() == params

    def test_invalid_mode_raises_on_fit(self):
        with pytest.raises(ValueError):
            ScanPreprocessor(mode="stretch").fit()
