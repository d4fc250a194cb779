"""Image containers and the low-level raster operations everything else builds on.

Images are stored planar: a float64 array of shape (channels, height, width)
with RGB samples nominally in [0, 1].  Single-channel rasters ("scalar
fields") are plain 2-D float64 arrays so that gradients, blurs and flow
components compose without wrapper overhead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import convolve1d

from .errors import InvalidInputError

__all__ = [
    "Image",
    "Pyramid",
    "ratio_channel",
    "spatial_gradients",
    "temporal_gradient",
    "gaussian_kernel",
    "gaussian_blur",
    "build_pyramid",
    "bilinear_sample",
    "resample_bilinear",
    "as_field",
]


def as_field(data, name: str = "field") -> np.ndarray:
    """Validate a 2-D scalar raster and return it as a float64 array."""
    f = np.asarray(data, dtype=np.float64)
    if f.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-D, got shape {f.shape}")
    if not np.all(np.isfinite(f)):
        raise InvalidInputError(f"{name} contains non-finite samples")
    return f


@dataclass(frozen=True)
class Image:
    """Planar multi-channel raster, float64, (channels, height, width)."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[np.newaxis, :, :]
        if arr.ndim != 3:
            raise InvalidInputError(f"image data must be 2-D or 3-D, got shape {arr.shape}")
        if arr.shape[0] not in (1, 3):
            raise InvalidInputError(f"image must have 1 or 3 channels, got {arr.shape[0]}")
        if arr.shape[1] < 2 or arr.shape[2] < 2:
            raise InvalidInputError(f"image must be at least 2x2, got {arr.shape[2]}x{arr.shape[1]}")
        if not np.all(np.isfinite(arr)):
            raise InvalidInputError("image contains non-finite samples")
        object.__setattr__(self, "data", np.ascontiguousarray(arr))

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int]:
        """(height, width) of the raster."""
        return self.data.shape[1:]

    def channel(self, i: int) -> np.ndarray:
        return self.data[i]

    @classmethod
    def from_channels(cls, *channels: np.ndarray) -> "Image":
        return cls(np.stack([np.asarray(c, dtype=np.float64) for c in channels]))

    @classmethod
    def from_interleaved(cls, arr: np.ndarray) -> "Image":
        """Build from an (height, width, channels) or (height, width) array."""
        a = np.asarray(arr, dtype=np.float64)
        if a.ndim == 2:
            return cls(a)
        return cls(np.moveaxis(a, 2, 0))

    def to_interleaved(self) -> np.ndarray:
        return np.moveaxis(self.data, 0, 2)


@dataclass(frozen=True)
class Pyramid:
    """Coarse-to-fine stack of scalar fields, level 0 at full resolution."""

    levels: list = field(default_factory=list)
    scale_factor: float = 0.5

    def __len__(self) -> int:
        return len(self.levels)


def ratio_channel(img: Image) -> np.ndarray:
    """Normalized blue/red chromaticity (B - R) / (B + R), in [-1, 1].

    Pixels with B + R == 0 map to 0: a black pixel carries no sky/cloud
    evidence, so it gets the neutral mid-value.
    """
    if img.channels != 3:
        raise InvalidInputError(f"ratio channel needs an RGB image, got {img.channels} channel(s)")
    r = img.channel(0)
    b = img.channel(2)
    den = b + r
    out = np.zeros_like(den)
    np.divide(b - r, den, out=out, where=den != 0)
    return out


def spatial_gradients(f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-axis derivatives: central differences inside, one-sided at borders."""
    f = as_field(f)
    if f.shape[0] < 2 or f.shape[1] < 2:
        raise InvalidInputError("gradients need at least two samples per axis")
    ix = np.empty_like(f)
    ix[:, 1:-1] = (f[:, 2:] - f[:, :-2]) * 0.5
    ix[:, 0] = f[:, 1] - f[:, 0]
    ix[:, -1] = f[:, -1] - f[:, -2]
    iy = np.empty_like(f)
    iy[1:-1, :] = (f[2:, :] - f[:-2, :]) * 0.5
    iy[0, :] = f[1, :] - f[0, :]
    iy[-1, :] = f[-1, :] - f[-2, :]
    return ix, iy


def temporal_gradient(f1: np.ndarray, f2: np.ndarray) -> np.ndarray:
    """Pointwise frame difference f2 - f1."""
    f1 = as_field(f1, "f1")
    f2 = as_field(f2, "f2")
    if f1.shape != f2.shape:
        raise InvalidInputError(f"frame shapes differ: {f1.shape} vs {f2.shape}")
    return f2 - f1


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian taps truncated at radius ceil(3*sigma)."""
    if sigma <= 0:
        raise InvalidInputError(f"sigma must be positive, got {sigma}")
    radius = math.ceil(3.0 * sigma)
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(xs * xs) / (2.0 * sigma * sigma))
    return k / k.sum()


def gaussian_blur(f: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian smoothing with replicate borders."""
    f = as_field(f)
    k = gaussian_kernel(sigma)
    out = convolve1d(f, k, axis=1, mode="nearest")
    return convolve1d(out, k, axis=0, mode="nearest")


def bilinear_sample(f: np.ndarray, x, y):
    """Sample `f` at real coordinates, clamped to the field's bounds.

    Accepts scalars or coordinate arrays; out-of-range coordinates replicate
    the border sample.
    """
    f = np.asarray(f, dtype=np.float64)
    h, w = f.shape
    xs = np.clip(np.asarray(x, dtype=np.float64), 0.0, float(w - 1))
    ys = np.clip(np.asarray(y, dtype=np.float64), 0.0, float(h - 1))
    x0 = np.floor(xs).astype(np.intp)
    y0 = np.floor(ys).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = xs - x0
    fy = ys - y0
    top = (1.0 - fx) * f[y0, x0] + fx * f[y0, x1]
    bottom = (1.0 - fx) * f[y1, x0] + fx * f[y1, x1]
    out = (1.0 - fy) * top + fy * bottom
    if np.isscalar(x) and np.isscalar(y):
        return float(out)
    return out


def resample_bilinear(f: np.ndarray, height: int, width: int) -> np.ndarray:
    """Resize a field by bilinear sampling on a uniform grid."""
    f = as_field(f)
    h, w = f.shape
    xs = np.arange(width, dtype=np.float64) * (w / width)
    ys = np.arange(height, dtype=np.float64) * (h / height)
    gx, gy = np.meshgrid(xs, ys)
    return bilinear_sample(f, gx, gy)


def build_pyramid(
    f: np.ndarray,
    scale_factor: float = 0.5,
    min_dim: int = 8,
    max_levels: int = 0,
) -> Pyramid:
    """Blur-and-downsample stack; stops before a dimension drops below min_dim.

    Level k+1 dimensions follow ceil(level_k * scale_factor).  max_levels = 0
    means no cap.
    """
    f = as_field(f)
    if not 0.0 < scale_factor < 1.0:
        raise InvalidInputError(f"scale_factor must be in (0, 1), got {scale_factor}")
    if min_dim < 8:
        raise InvalidInputError(f"min_dim must be at least 8, got {min_dim}")
    if max_levels < 0:
        raise InvalidInputError(f"max_levels must be non-negative, got {max_levels}")
    levels = [f]
    while True:
        if max_levels and len(levels) >= max_levels:
            break
        h, w = levels[-1].shape
        nh = math.ceil(h * scale_factor)
        nw = math.ceil(w * scale_factor)
        if nh < min_dim or nw < min_dim:
            break
        if nh == h and nw == w:
            # ceil can stall near min_dim for scale factors close to 1
            break
        blurred = gaussian_blur(levels[-1], 1.0)
        levels.append(resample_bilinear(blurred, nh, nw))
    return Pyramid(levels=levels, scale_factor=scale_factor)
