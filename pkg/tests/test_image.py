import numpy as np
import pytest

from skycast.errors import InvalidInputError
from skycast.image import (
    Image,
    bilinear_sample,
    build_pyramid,
    gaussian_blur,
    gaussian_kernel,
    ratio_channel,
    spatial_gradients,
    temporal_gradient,
)


def rgb_image(r, g, b):
    return Image.from_channels(np.asarray(r, float), np.asarray(g, float), np.asarray(b, float))


class TestImage:
    def test_planar_layout(self):
        img = Image(np.zeros((3, 4, 5)))
        assert (img.channels, img.height, img.width) == (3, 4, 5)

    def test_interleaved_round_trip(self):
        arr = np.arange(24, dtype=float).reshape(2, 4, 3) / 24.0
        img = Image.from_interleaved(arr)
        np.testing.assert_array_equal(img.to_interleaved(), arr)

    @pytest.mark.parametrize(
        "data",
        [
            np.zeros((2, 4, 5)),  # unsupported channel count
            np.zeros((3, 1, 5)),  # too short
            np.full((3, 4, 5), np.nan),
        ],
    )
    def test_rejects_invalid(self, data):
        with pytest.raises(InvalidInputError):
            Image(data)


class TestRatioChannel:
    def test_direct_formula(self):
        img = rgb_image(np.full((2, 2), 0.4), np.full((2, 2), 0.5), np.full((2, 2), 0.6))
        np.testing.assert_allclose(ratio_channel(img), (0.6 - 0.4) / (0.6 + 0.4), atol=1e-15)

    def test_equal_blue_and_red_gives_zero(self):
        c = np.linspace(0.1, 0.9, 16).reshape(4, 4)
        img = rgb_image(c, np.full((4, 4), 0.33), c)
        np.testing.assert_array_equal(ratio_channel(img), np.zeros((4, 4)))

    def test_black_pixel_defined_as_zero(self):
        img = rgb_image(np.zeros((2, 2)), np.zeros((2, 2)), np.zeros((2, 2)))
        np.testing.assert_array_equal(ratio_channel(img), np.zeros((2, 2)))

    def test_rejects_single_channel(self):
        with pytest.raises(InvalidInputError):
            ratio_channel(Image(np.zeros((1, 4, 4))))

    def test_bounded_for_nonnegative_channels(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            img = rgb_image(*rng.uniform(0.0, 1.0, size=(3, 6, 6)))
            r = ratio_channel(img)
            assert np.all(r >= -1.0) and np.all(r <= 1.0)


def brute_force_gradients(f):
    """Independent per-pixel finite differences, loop form."""
    h, w = f.shape
    ix = np.zeros_like(f)
    iy = np.zeros_like(f)
    for y in range(h):
        for x in range(w):
            if 0 < x < w - 1:
                ix[y, x] = (f[y, x + 1] - f[y, x - 1]) / 2.0
            elif x == 0:
                ix[y, x] = f[y, 1] - f[y, 0]
            else:
                ix[y, x] = f[y, w - 1] - f[y, w - 2]
            if 0 < y < h - 1:
                iy[y, x] = (f[y + 1, x] - f[y - 1, x]) / 2.0
            elif y == 0:
                iy[y, x] = f[1, x] - f[0, x]
            else:
                iy[y, x] = f[h - 1, x] - f[h - 2, x]
    return ix, iy


class TestSpatialGradients:
    def test_constant_field_zero(self):
        ix, iy = spatial_gradients(np.full((5, 7), 3.25))
        np.testing.assert_array_equal(ix, 0.0)
        np.testing.assert_array_equal(iy, 0.0)

    def test_ramp(self):
        f = np.tile(np.arange(6, dtype=float), (4, 1))
        ix, iy = spatial_gradients(f)
        np.testing.assert_array_equal(ix[:, 1:-1], 1.0)
        np.testing.assert_array_equal(iy, 0.0)

    def test_affine_5x5_oracle(self):
        gx, gy = np.meshgrid(np.arange(5, dtype=float), np.arange(5, dtype=float))
        f = 3.0 * gx + 2.0 * gy
        ix, iy = spatial_gradients(f)
        oix, oiy = brute_force_gradients(f)
        np.testing.assert_array_equal(ix, oix)
        np.testing.assert_array_equal(iy, oiy)
        np.testing.assert_array_equal(ix[1:-1, 1:-1], 3.0)
        np.testing.assert_array_equal(iy[1:-1, 1:-1], 2.0)

    def test_matches_brute_force_on_random_fields(self):
        rng = np.random.default_rng(2)
        for _ in range(5):
            f = rng.standard_normal((7, 9))
            ix, iy = spatial_gradients(f)
            oix, oiy = brute_force_gradients(f)
            np.testing.assert_allclose(ix, oix, atol=1e-15)
            np.testing.assert_allclose(iy, oiy, atol=1e-15)

    def test_affine_exact_everywhere(self):
        rng = np.random.default_rng(3)
        gx, gy = np.meshgrid(np.arange(9, dtype=float), np.arange(6, dtype=float))
        for _ in range(5):
            a, b, c = rng.uniform(-2, 2, 3)
            ix, iy = spatial_gradients(a * gx + b * gy + c)
            np.testing.assert_allclose(ix[1:-1, 1:-1], a, atol=1e-12)
            np.testing.assert_allclose(iy[1:-1, 1:-1], b, atol=1e-12)


class TestTemporalGradient:
    def test_identical_frames(self):
        f = np.random.default_rng(4).random((5, 5))
        np.testing.assert_array_equal(temporal_gradient(f, f), np.zeros((5, 5)))

    def test_constant_offset(self):
        f = np.random.default_rng(5).random((5, 5))
        np.testing.assert_allclose(temporal_gradient(f, f + 0.25), 0.25, atol=1e-15)

    def test_shifted_ramp(self):
        gx = np.tile(np.arange(8, dtype=float), (5, 1))
        np.testing.assert_array_equal(temporal_gradient(gx, gx - 1.0), -1.0)

    def test_rejects_mismatched_shapes(self):
        with pytest.raises(InvalidInputError):
            temporal_gradient(np.zeros((4, 4)), np.zeros((4, 5)))


class TestGaussianBlur:
    def test_kernel_truncation_radius(self):
        assert len(gaussian_kernel(1.0)) == 7
        assert len(gaussian_kernel(0.8)) == 2 * 3 + 1
        assert gaussian_kernel(2.0).sum() == pytest.approx(1.0, abs=1e-12)

    def test_constant_preserved(self):
        f = np.full((9, 9), 0.6)
        out = gaussian_blur(f, 1.7)
        np.testing.assert_allclose(out, 0.6, atol=1e-12)
        assert abs(out.mean() - f.mean()) < 1e-6

    def test_impulse_center_weight(self):
        k = gaussian_kernel(1.0)
        f = np.zeros((9, 9))
        f[4, 4] = 1.0
        out = gaussian_blur(f, 1.0)
        center = k[len(k) // 2]
        assert out[4, 4] == pytest.approx(center * center, abs=1e-12)

    def test_tiny_sigma_is_identity(self):
        f = np.random.default_rng(6).random((8, 8))
        np.testing.assert_allclose(gaussian_blur(f, 0.01), f, atol=1e-3)

    def test_linearity(self):
        rng = np.random.default_rng(7)
        f, g = rng.random((6, 6)), rng.random((6, 6))
        a, b = 1.7, -0.4
        lhs = gaussian_blur(a * f + b * g, 1.3)
        rhs = a * gaussian_blur(f, 1.3) + b * gaussian_blur(g, 1.3)
        np.testing.assert_allclose(lhs, rhs, atol=1e-9)

    def test_rejects_nonpositive_sigma(self):
        with pytest.raises(InvalidInputError):
            gaussian_blur(np.zeros((4, 4)), 0.0)


class TestBilinearSample:
    def test_grid_points_exact(self):
        f = np.random.default_rng(8).random((5, 6))
        for y in range(5):
            for x in range(6):
                assert bilinear_sample(f, float(x), float(y)) == f[y, x]

    def test_horizontal_midpoint(self):
        f = np.array([[2.0, 4.0], [6.0, 8.0]])
        assert bilinear_sample(f, 0.5, 0.0) == pytest.approx(3.0)
        assert bilinear_sample(f, 0.0, 0.5) == pytest.approx(4.0)

    def test_clamps_out_of_range(self):
        f = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
        assert bilinear_sample(f, -5.0, 0.0) == f[0, 0]
        assert bilinear_sample(f, 99.0, 1.0) == f[1, 2]
        assert bilinear_sample(f, 1.0, -3.5) == f[0, 1]

    def test_continuity(self):
        f = np.random.default_rng(9).random((8, 8))  # bounded by 1
        rng = np.random.default_rng(10)
        for _ in range(50):
            x, y = rng.uniform(0, 7, 2)
            eps = 9e-7
            a = bilinear_sample(f, x, y)
            b = bilinear_sample(f, x + eps, y + eps)
            assert abs(a - b) < 1e-4


def expected_pyramid_dims(h, w, scale, min_dim):
    dims = [(h, w)]
    while True:
        nh = int(np.ceil(dims[-1][0] * scale))
        nw = int(np.ceil(dims[-1][1] * scale))
        if nh < min_dim or nw < min_dim:
            break
        dims.append((nh, nw))
    return dims


class TestBuildPyramid:
    def test_64_gives_four_levels(self):
        p = build_pyramid(np.zeros((64, 64)), 0.5, 8)
        assert [lvl.shape for lvl in p.levels] == [(64, 64), (32, 32), (16, 16), (8, 8)]

    def test_already_at_floor(self):
        p = build_pyramid(np.zeros((8, 8)), 0.5, 8)
        assert len(p) == 1

    def test_constant_preserved_at_every_level(self):
        p = build_pyramid(np.full((40, 40), 0.37), 0.5, 8)
        for lvl in p.levels:
            np.testing.assert_allclose(lvl, 0.37, atol=1e-12)

    def test_ceil_recurrence(self):
        f = np.zeros((100, 70))
        p = build_pyramid(f, 0.6, 8)
        assert [lvl.shape for lvl in p.levels] == expected_pyramid_dims(100, 70, 0.6, 8)

    def test_max_levels_cap(self):
        p = build_pyramid(np.zeros((64, 64)), 0.5, 8, max_levels=2)
        assert len(p) == 2

    @pytest.mark.parametrize("scale,min_dim", [(0.0, 8), (1.0, 8), (0.5, 4)])
    def test_rejects_bad_parameters(self, scale, min_dim):
        with pytest.raises(InvalidInputError):
            build_pyramid(np.zeros((32, 32)), scale, min_dim)
