"""Synthetic cloud scenes with exactly known motion, masks and future frames.

Scenes are sums of smooth Gaussian "cloud" blobs drifting over a blue-sky
background at a commanded velocity.  Every frame is evaluated in closed form
at shifted coordinates, so the emitted ground truth carries no resampling
bias, and frames are independent functions of the frame index.

Randomness comes from a counter-based construction so that identical seeds
give bit-identical scenes on any platform and draws never depend on
generation order: each draw scrambles (seed, stream, index) through the
splitmix64 finalizer followed by an xorshift64* step (constants below).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .flow import FlowField
from .image import Image
from .segment import BinaryMask

__all__ = [
    "SceneSpec",
    "SyntheticSequence",
    "generate",
    "endpoint_error",
    "uniforms",
    "gaussians",
    "SKY_RGB",
    "CLOUD_RGB",
    "cloudiness_from_ratio",
    "MASK_CLOUDINESS_THRESHOLD",
]

# splitmix64 finalizer and xorshift64* multipliers.
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_STAR = np.uint64(0x2545F4914F6CDD1D)

SKY_RGB = (0.10, 0.30, 0.85)
CLOUD_RGB = (0.92, 0.92, 0.92)

# A pixel is cloud in the ground-truth mask when blob coverage reaches this
# level.  The value sits where the ratio histogram of rendered scenes
# actually separates (blob skirts are smooth), so mask truth and
# ratio-channel segmentation describe the same boundary.
MASK_CLOUDINESS_THRESHOLD = 0.26


def _mix64(x: np.ndarray) -> np.ndarray:
    x = x ^ (x >> np.uint64(30))
    x = x * _MIX1
    x = x ^ (x >> np.uint64(27))
    x = x * _MIX2
    return x ^ (x >> np.uint64(31))


def _scramble(x: np.ndarray) -> np.ndarray:
    x = x ^ (x >> np.uint64(12))
    x = x ^ (x << np.uint64(25))
    x = x ^ (x >> np.uint64(27))
    return x * _STAR


def _words(seed: int, stream: int, count: int) -> np.ndarray:
    with np.errstate(over="ignore"):  # modular 64-bit wraparound is the point
        key = _mix64(np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + _GOLDEN * np.uint64(stream + 1))
        idx = np.arange(1, count + 1, dtype=np.uint64)
        return _scramble(_mix64(key + _GOLDEN * idx))


def uniforms(seed: int, stream: int, count: int) -> np.ndarray:
    """`count` doubles in [0, 1) from the (seed, stream) draw sequence."""
    return (_words(seed, stream, count) >> np.uint64(11)) * 2.0 ** -53


def gaussians(seed: int, stream: int, count: int) -> np.ndarray:
    """Standard normal draws via the Box-Muller transform."""
    w = _words(seed, stream, 2 * count)
    u1 = ((w[0::2] >> np.uint64(11)) + np.uint64(1)) * 2.0 ** -53  # (0, 1]
    u2 = (w[1::2] >> np.uint64(11)) * 2.0 ** -53
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


@dataclass(frozen=True)
class SceneSpec:
    """Parameters of a generated cloud sequence."""

    width: int = 128
    height: int = 128
    n_frames: int = 4
    velocity: tuple = (1.0, 0.0)
    deformation_rate: float = 0.0
    n_blobs: int = 6
    blob_scale: float = 12.0
    noise_sigma: float = 0.0
    seed: int = 0

    def validate(self) -> None:
        if self.width < 32 or self.height < 32:
            raise InvalidInputError(f"scene must be at least 32x32, got {self.width}x{self.height}")
        if self.n_frames < 3:
            raise InvalidInputError(f"scene needs at least 3 frames, got {self.n_frames}")
        if not 0.0 <= self.noise_sigma < 0.1:
            raise InvalidInputError(f"noise_sigma must be in [0, 0.1), got {self.noise_sigma}")
        if self.deformation_rate < 0:
            raise InvalidInputError(f"deformation_rate must be non-negative, got {self.deformation_rate}")
        if self.n_blobs < 1:
            raise InvalidInputError(f"scene needs at least one blob, got {self.n_blobs}")
        if self.blob_scale <= 0:
            raise InvalidInputError(f"blob_scale must be positive, got {self.blob_scale}")
        vx, vy = self.velocity
        if not (np.isfinite(vx) and np.isfinite(vy)):
            raise InvalidInputError("velocity components must be finite")


@dataclass(frozen=True)
class SyntheticSequence:
    """Rendered frames plus the exact flow and mask ground truth."""

    spec: SceneSpec
    frames: list
    true_flows: list
    true_masks: list


def _blob_layout(spec: SceneSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Initial centers, widths and amplitudes, placed to stay in frame."""
    draws = uniforms(spec.seed, 0, 4 * spec.n_blobs).reshape(spec.n_blobs, 4)
    sigma = spec.blob_scale * (0.7 + 0.6 * draws[:, 2])
    amp = 0.65 + 0.35 * draws[:, 3]
    growth = (1.0 + spec.deformation_rate) ** (spec.n_frames - 1)
    travel = spec.n_frames - 1
    vx, vy = spec.velocity
    pad = 2.0 * sigma * growth

    def place(u, extent, velocity_component):
        lo = pad + np.maximum(0.0, -velocity_component) * travel
        hi = (extent - 1.0) - pad - np.maximum(0.0, velocity_component) * travel
        mid = np.full_like(lo, (extent - 1.0) / 2.0)
        return np.where(hi > lo, lo + u * (hi - lo), mid)

    cx = place(draws[:, 0], spec.width, vx)
    cy = place(draws[:, 1], spec.height, vy)
    return cx, cy, sigma, amp


def _cloudiness(spec: SceneSpec, cx, cy, sigma, amp, k: int) -> np.ndarray:
    """Blob coverage in [0, 1) for frame k, evaluated in closed form."""
    xs = np.arange(spec.width, dtype=np.float64)
    ys = np.arange(spec.height, dtype=np.float64)
    gx, gy = np.meshgrid(xs, ys)
    vx, vy = spec.velocity
    scale = (1.0 + spec.deformation_rate) ** k
    clear = np.ones((spec.height, spec.width))
    for i in range(len(cx)):
        dx = gx - (cx[i] + k * vx)
        dy = gy - (cy[i] + k * vy)
        s2 = 2.0 * (sigma[i] * scale) ** 2
        clear *= 1.0 - amp[i] * np.exp(-(dx * dx + dy * dy) / s2)
    return 1.0 - clear


def generate(spec: SceneSpec) -> SyntheticSequence:
    """Render the sequence described by `spec`, with exact ground truth."""
    spec.validate()
    cx, cy, sigma, amp = _blob_layout(spec)
    frames = []
    masks = []
    n_px = spec.height * spec.width
    for k in range(spec.n_frames):
        cover = _cloudiness(spec, cx, cy, sigma, amp, k)
        masks.append(BinaryMask(cover < MASK_CLOUDINESS_THRESHOLD))
        channels = []
        for c in range(3):
            ch = SKY_RGB[c] + cover * (CLOUD_RGB[c] - SKY_RGB[c])
            if spec.noise_sigma > 0:
                noise = gaussians(spec.seed, 1 + 3 * k + c, n_px)
                ch = ch + spec.noise_sigma * noise.reshape(spec.height, spec.width)
            channels.append(np.clip(ch, 0.0, 1.0))
        frames.append(Image.from_channels(*channels))
    vx, vy = spec.velocity
    flows = [
        FlowField(
            np.full((spec.height, spec.width), float(vx)),
            np.full((spec.height, spec.width), float(vy)),
        )
        for _ in range(spec.n_frames - 1)
    ]
    return SyntheticSequence(spec=spec, frames=frames, true_flows=flows, true_masks=masks)


def cloudiness_from_ratio(ratio: np.ndarray) -> np.ndarray:
    """Invert the noiseless rendering: blob coverage from the ratio channel."""
    r_sky, _, b_sky = SKY_RGB
    r_cloud, _, b_cloud = CLOUD_RGB
    num0 = b_sky - r_sky
    num1 = (b_cloud - r_cloud) - num0
    den0 = b_sky + r_sky
    den1 = (b_cloud + r_cloud) - den0
    # ratio = (num0 + C num1) / (den0 + C den1), solved for C
    return (num0 - den0 * ratio) / (den1 * ratio - num1)


def endpoint_error(estimated: FlowField, truth: FlowField, roi: BinaryMask | None = None) -> float:
    """Mean Euclidean distance between flow vectors, optionally over a region."""
    if estimated.shape != truth.shape:
        raise InvalidInputError(f"flow shapes differ: {estimated.shape} vs {truth.shape}")
    du = estimated.u - truth.u
    dv = estimated.v - truth.v
    dist = np.sqrt(du * du + dv * dv)
    if roi is None:
        return float(dist.mean())
    if roi.shape != truth.shape:
        raise InvalidInputError(f"roi shape {roi.shape} does not match flow {truth.shape}")
    selected = roi.sky
    if not selected.any():
        raise InvalidInputError("roi selects no pixels")
    return float(dist[selected].mean())
