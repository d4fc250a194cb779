import numpy as np
import pytest

from skycast.errors import InvalidInputError
from skycast.flow import FlowField
from skycast.image import bilinear_sample, ratio_channel
from skycast.segment import BinaryMask
from skycast.synthetic import (
    SceneSpec,
    endpoint_error,
    gaussians,
    generate,
    uniforms,
)


class TestRng:
    def test_uniforms_in_unit_interval(self):
        u = uniforms(123, 0, 10000)
        assert np.all(u >= 0.0) and np.all(u < 1.0)

    def test_deterministic(self):
        np.testing.assert_array_equal(uniforms(9, 4, 256), uniforms(9, 4, 256))

    def test_streams_independent(self):
        assert not np.array_equal(uniforms(9, 0, 64), uniforms(9, 1, 64))
        assert not np.array_equal(uniforms(9, 0, 64), uniforms(10, 0, 64))

    def test_uniform_moments(self):
        u = uniforms(7, 2, 200_000)
        assert abs(u.mean() - 0.5) < 0.005
        assert abs(u.var() - 1.0 / 12.0) < 0.002

    def test_gaussian_moments(self):
        g = gaussians(7, 3, 200_000)
        assert abs(g.mean()) < 0.01
        assert abs(g.std() - 1.0) < 0.01


class TestGenerate:
    def test_same_seed_bit_identical(self):
        spec = SceneSpec(seed=42, velocity=(1.5, -0.5), noise_sigma=0.02)
        a = generate(spec)
        b = generate(spec)
        for fa, fb in zip(a.frames, b.frames):
            np.testing.assert_array_equal(fa.data, fb.data)
        for ma, mb in zip(a.true_masks, b.true_masks):
            np.testing.assert_array_equal(ma.sky, mb.sky)

    def test_different_seeds_differ(self):
        a = generate(SceneSpec(seed=1))
        b = generate(SceneSpec(seed=2))
        assert not np.array_equal(a.frames[0].data, b.frames[0].data)

    def test_static_scene(self):
        seq = generate(SceneSpec(velocity=(0.0, 0.0), deformation_rate=0.0, noise_sigma=0.0, seed=5))
        for frame in seq.frames[1:]:
            np.testing.assert_array_equal(frame.data, seq.frames[0].data)
        for flow in seq.true_flows:
            np.testing.assert_array_equal(flow.u, 0.0)
            np.testing.assert_array_equal(flow.v, 0.0)

    def test_integer_translation_shifts_samples(self):
        seq = generate(SceneSpec(velocity=(1.0, 0.0), noise_sigma=0.0, n_frames=3, seed=6))
        for k in (1, 2):
            shifted = seq.frames[k].data[:, :, k:]
            original = seq.frames[0].data[:, :, :-k]
            np.testing.assert_allclose(shifted, original, atol=1e-9)

    def test_mask_centroid_advances_with_velocity(self):
        seq = generate(
            SceneSpec(velocity=(2.0, 1.0), noise_sigma=0.0, n_frames=4, n_blobs=3, seed=8)
        )
        y0, x0 = np.nonzero(~seq.true_masks[0].sky)
        y2, x2 = np.nonzero(~seq.true_masks[2].sky)
        assert abs(x2.mean() - x0.mean() - 2 * 2.0) < 0.2
        assert abs(y2.mean() - y0.mean() - 2 * 1.0) < 0.2

    def test_deformation_grows_mask_area(self):
        seq = generate(
            SceneSpec(
                velocity=(0.0, 0.0), deformation_rate=0.1, noise_sigma=0.0,
                n_blobs=1, blob_scale=10.0, n_frames=3, seed=9,
            )
        )
        areas = [np.count_nonzero(~m.sky) for m in seq.true_masks]
        for k in (1, 2):
            ratio = areas[k] / areas[k - 1]
            assert abs(ratio - 1.1**2) < 0.05 * 1.1**2

    def test_mask_area_monotone_under_deformation(self):
        seq = generate(
            SceneSpec(velocity=(0.5, 0.0), deformation_rate=0.05, noise_sigma=0.0,
                      n_frames=5, n_blobs=4, seed=10)
        )
        areas = [np.count_nonzero(~m.sky) for m in seq.true_masks]
        assert all(b >= a for a, b in zip(areas, areas[1:]))

    def test_brightness_constancy_up_to_resampling(self):
        seq = generate(
            SceneSpec(velocity=(0.7, -0.4), noise_sigma=0.0, n_frames=3,
                      n_blobs=4, blob_scale=12.0, seed=11)
        )
        gx, gy = np.meshgrid(np.arange(128, dtype=float), np.arange(128, dtype=float))
        for k in (0, 1):
            r_next = ratio_channel(seq.frames[k + 1])
            r_cur = ratio_channel(seq.frames[k])
            pulled = bilinear_sample(r_cur, gx - 0.7, gy + 0.4)
            assert np.abs(r_next - pulled).mean() < 1e-3

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"width": 16},
            {"n_frames": 2},
            {"noise_sigma": 0.5},
            {"deformation_rate": -0.1},
            {"n_blobs": 0},
            {"blob_scale": 0.0},
        ],
    )
    def test_rejects_invalid_spec(self, kwargs):
        with pytest.raises(InvalidInputError):
            generate(SceneSpec(**kwargs))


class TestEndpointError:
    def test_identical_fields(self):
        f = FlowField(np.ones((8, 8)), np.zeros((8, 8)))
        assert endpoint_error(f, f) == 0.0

    def test_three_four_five(self):
        est = FlowField(np.full((8, 8), 3.0), np.full((8, 8), 4.0))
        assert endpoint_error(est, FlowField.zeros(8, 8)) == pytest.approx(5.0)

    def test_noise_bound(self):
        rng = np.random.default_rng(12)
        truth = FlowField(rng.standard_normal((16, 16)), rng.standard_normal((16, 16)))
        eps = 0.05
        nu = rng.uniform(-eps, eps, (16, 16))
        nv = rng.uniform(-eps, eps, (16, 16))
        est = FlowField(truth.u + nu, truth.v + nv)
        brute = float(np.mean(np.hypot(nu, nv)))
        assert endpoint_error(est, truth) == pytest.approx(brute, abs=1e-12)
        assert endpoint_error(est, truth) <= eps * np.sqrt(2.0)

    def test_roi_restricts_mean(self):
        est = FlowField(np.zeros((4, 4)), np.zeros((4, 4)))
        u = np.zeros((4, 4))
        u[0, 0] = 8.0
        truth = FlowField(u, np.zeros((4, 4)))
        roi = np.zeros((4, 4), dtype=bool)
        roi[0, 0] = True
        assert endpoint_error(est, truth, BinaryMask(roi)) == pytest.approx(8.0)

    def test_rejects_mismatched_shapes(self):
        with pytest.raises(InvalidInputError):
            endpoint_error(FlowField.zeros(4, 4), FlowField.zeros(4, 5))
