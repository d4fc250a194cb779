"""Shared builders for synthetic test inputs."""

import numpy as np

from skycast.image import gaussian_blur, ratio_channel
from skycast.synthetic import cloudiness_from_ratio


def gaussian_blob(height, width, cx, cy, sigma, amplitude=1.0):
    """Single smooth blob evaluated in closed form."""
    gx, gy = np.meshgrid(np.arange(width, dtype=float), np.arange(height, dtype=float))
    return amplitude * np.exp(-((gx - cx) ** 2 + (gy - cy) ** 2) / (2.0 * sigma**2))


def multiscale_texture(height, width, seed=17, coarse=9.0, fine=2.0, fine_weight=0.25):
    """Texture with both coarse and fine structure, for pyramid tests."""
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((height, width))
    return gaussian_blur(noise, coarse) + fine_weight * gaussian_blur(noise, fine)


def shifted_pair(field, shift_x):
    """Crop a wide field twice so the scene moves right by shift_x pixels.

    Returns (f1, f2) with true flow (+shift_x, 0): content at x in f1 sits
    at x + shift_x in f2.
    """
    width = field.shape[1] - shift_x
    f1 = field[:, shift_x : shift_x + width]
    f2 = field[:, 0:width]
    return np.ascontiguousarray(f1), np.ascontiguousarray(f2)


def cloud_centroid(img):
    """Intensity centroid of recovered blob coverage, (cx, cy)."""
    cover = np.clip(cloudiness_from_ratio(ratio_channel(img)), 0.0, 1.0)
    gy, gx = np.mgrid[0 : img.height, 0 : img.width]
    total = cover.sum()
    return float((gx * cover).sum() / total), float((gy * cover).sum() / total)
