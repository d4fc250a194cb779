"""Dense two-frame optical flow on scalar fields.

Three estimators share one data path:

* ``horn_schunck``: global smoothness, fixed-point sweeps on the coupled
  per-pixel update  u <- u_bar - Ix (Ix u_bar + Iy v_bar + It) / (a^2 + Ix^2 + Iy^2).
* ``lucas_kanade``: windowed least squares on the structure tensor, with an
  eigenvalue guard for aperture-deficient pixels.
* ``clg_flow``: the structure-tensor entries smoothed at scale
  ``window_sigma`` drive the same sweeps as ``horn_schunck``; with smoothing
  disabled it degenerates to ``horn_schunck`` exactly.

``pyramid_flow`` wraps any of them in coarse-to-fine refinement with
incremental warping, which is what makes multi-pixel cloud motion reachable.

Flow convention: ``flow[p]`` is the displacement (pixels per frame interval)
such that a feature at ``p`` in the first frame sits at ``p + flow[p]`` in
the second, i.e. f1(p) ~ f2(p + flow(p)).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .errors import InvalidInputError
from .kernels.reference import _neighbor_average
from .image import (
    as_field,
    bilinear_sample,
    build_pyramid,
    gaussian_blur,
    resample_bilinear,
    spatial_gradients,
    temporal_gradient,
)

__all__ = [
    "FlowField",
    "VelocityField",
    "FlowParams",
    "METHODS",
    "flow_residual",
    "horn_schunck",
    "lucas_kanade",
    "clg_flow",
    "pyramid_flow",
    "to_velocity",
    "flow_energy",
    "flow_energy_gradient",
    "energy_trace",
]

METHODS = ("horn_schunck", "lucas_kanade", "clg")

# Smoothness weight for the default solver, tuned for ratio-channel data
# whose samples live in [-1, 1] and whose gradients are therefore small.
DEFAULT_ALPHA = 0.3


@dataclass(frozen=True)
class FlowField:
    """Per-pixel displacement, components in pixels per frame interval."""

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        u = as_field(self.u, "u")
        v = as_field(self.v, "v")
        if u.shape != v.shape:
            raise InvalidInputError(f"flow component shapes differ: {u.shape} vs {v.shape}")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def height(self) -> int:
        return self.u.shape[0]

    @property
    def width(self) -> int:
        return self.u.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.u.shape

    @classmethod
    def zeros(cls, height: int, width: int) -> "FlowField":
        return cls(np.zeros((height, width)), np.zeros((height, width)))


@dataclass(frozen=True)
class VelocityField(FlowField):
    """Same layout as FlowField, components in pixels per minute."""


@dataclass(frozen=True)
class FlowParams:
    """Solver configuration.

    ``window_sigma`` is the local integration scale; 0 is the documented
    no-smoothing sentinel that turns clg into horn_schunck.  ``max_levels``
    caps the pyramid depth (0 = no cap).
    """

    method: str = "clg"
    alpha: float = DEFAULT_ALPHA
    window_sigma: float = 4.0
    iterations: int = 100
    pyramid_scale: float = 0.5
    pyramid_min_dim: int = 8
    warps_per_level: int = 3
    eigen_threshold: float = 1e-6
    max_levels: int = 0

    def validate(self) -> None:
        if self.method not in METHODS:
            raise InvalidInputError(f"unknown method {self.method!r}, expected one of {METHODS}")
        if self.alpha <= 0:
            raise InvalidInputError(f"alpha must be positive, got {self.alpha}")
        if self.window_sigma < 0:
            raise InvalidInputError(f"window_sigma must be non-negative, got {self.window_sigma}")
        if self.iterations < 1:
            raise InvalidInputError(f"iterations must be at least 1, got {self.iterations}")
        if not 0.0 < self.pyramid_scale < 1.0:
            raise InvalidInputError(f"pyramid_scale must be in (0, 1), got {self.pyramid_scale}")
        if self.pyramid_min_dim < 8:
            raise InvalidInputError(f"pyramid_min_dim must be at least 8, got {self.pyramid_min_dim}")
        if self.warps_per_level < 1:
            raise InvalidInputError(f"warps_per_level must be at least 1, got {self.warps_per_level}")
        if self.eigen_threshold <= 0:
            raise InvalidInputError(f"eigen_threshold must be positive, got {self.eigen_threshold}")
        if self.max_levels < 0:
            raise InvalidInputError(f"max_levels must be non-negative, got {self.max_levels}")


def _check_pair(f1, f2) -> tuple[np.ndarray, np.ndarray]:
    f1 = as_field(f1, "f1")
    f2 = as_field(f2, "f2")
    if f1.shape != f2.shape:
        raise InvalidInputError(f"frame shapes differ: {f1.shape} vs {f2.shape}")
    return f1, f2


def _gradients(f1: np.ndarray, f2: np.ndarray):
    # Spatial gradients on the frame average treat the two timestamps
    # symmetrically; the temporal derivative is the plain difference.
    ix, iy = spatial_gradients(0.5 * (f1 + f2))
    it = temporal_gradient(f1, f2)
    return ix, iy, it


def _tensor_entries(f1: np.ndarray, f2: np.ndarray, sigma: float):
    ix, iy, it = _gradients(f1, f2)
    entries = (ix * ix, ix * iy, iy * iy, ix * it, iy * it)
    if sigma > 0:
        entries = tuple(gaussian_blur(e, sigma) for e in entries)
    return entries


def flow_residual(f1, f2, flow: FlowField) -> np.ndarray:
    """Left side of the linearized constancy equation, Ix u + Iy v + It."""
    f1, f2 = _check_pair(f1, f2)
    if flow.shape != f1.shape:
        raise InvalidInputError(f"flow shape {flow.shape} does not match frames {f1.shape}")
    ix, iy, it = _gradients(f1, f2)
    return ix * flow.u + iy * flow.v + it


def _initial(init: FlowField | None, shape, name: str) -> tuple[np.ndarray, np.ndarray]:
    if init is None:
        z = np.zeros(shape)
        return z, z.copy()
    if init.shape != shape:
        raise InvalidInputError(f"{name} init shape {init.shape} does not match frames {shape}")
    return init.u, init.v


def horn_schunck(f1, f2, params: FlowParams, init: FlowField | None = None) -> FlowField:
    """Globally smooth flow via exactly ``params.iterations`` Jacobi sweeps."""
    params.validate()
    f1, f2 = _check_pair(f1, f2)
    j11, j12, j22, j13, j23 = _tensor_entries(f1, f2, 0.0)
    u0, v0 = _initial(init, f1.shape, "horn_schunck")
    u, v = kernels.coupled_jacobi(j11, j12, j22, j13, j23, params.alpha, params.iterations, u0, v0)
    return FlowField(u, v)


def clg_flow(f1, f2, params: FlowParams, init: FlowField | None = None) -> FlowField:
    """Combined local-global flow: smoothed tensor data term, global sweeps."""
    params.validate()
    f1, f2 = _check_pair(f1, f2)
    j11, j12, j22, j13, j23 = _tensor_entries(f1, f2, params.window_sigma)
    u0, v0 = _initial(init, f1.shape, "clg")
    u, v = kernels.coupled_jacobi(j11, j12, j22, j13, j23, params.alpha, params.iterations, u0, v0)
    return FlowField(u, v)


def lucas_kanade(f1, f2, params: FlowParams) -> FlowField:
    """Windowed least-squares flow; aperture-deficient pixels get (0, 0).

    Solves the per-pixel 2x2 system J w = -(J13, J23) built from the
    Gaussian-weighted structure tensor.  Pixels whose smaller tensor
    eigenvalue falls below ``eigen_threshold`` carry no usable motion
    evidence and are zeroed.
    """
    params.validate()
    if params.window_sigma <= 0:
        raise InvalidInputError("lucas_kanade requires window_sigma > 0")
    f1, f2 = _check_pair(f1, f2)
    j11, j12, j22, j13, j23 = _tensor_entries(f1, f2, params.window_sigma)
    trace_half = 0.5 * (j11 + j22)
    diff_half = 0.5 * (j11 - j22)
    lambda_min = trace_half - np.sqrt(diff_half * diff_half + j12 * j12)
    det = j11 * j22 - j12 * j12
    ok = lambda_min >= params.eigen_threshold
    safe_det = np.where(ok, det, 1.0)
    b1 = -j13
    b2 = -j23
    u = np.where(ok, (j22 * b1 - j12 * b2) / safe_det, 0.0)
    v = np.where(ok, (j11 * b2 - j12 * b1) / safe_det, 0.0)
    return FlowField(u, v)


_SINGLE_LEVEL = {
    "horn_schunck": horn_schunck,
    "clg": clg_flow,
    "lucas_kanade": lambda f1, f2, params, init=None: lucas_kanade(f1, f2, params),
}


def _warp_toward(f: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    # Pull the second frame back onto the first frame's grid: sample at p + w.
    h, w = f.shape
    gx, gy = np.meshgrid(np.arange(w, dtype=np.float64), np.arange(h, dtype=np.float64))
    return bilinear_sample(f, gx + u, gy + v)


def _upscale_flow(u, v, height, width, scale):
    ch, cw = u.shape
    xs = np.arange(width, dtype=np.float64) * (cw / width)
    ys = np.arange(height, dtype=np.float64) * (ch / height)
    gx, gy = np.meshgrid(xs, ys)
    inv = 1.0 / scale
    return bilinear_sample(u, gx, gy) * inv, bilinear_sample(v, gx, gy) * inv


def pyramid_flow(f1, f2, params: FlowParams) -> FlowField:
    """Coarse-to-fine flow with ``warps_per_level`` incremental warp cycles."""
    params.validate()
    f1, f2 = _check_pair(f1, f2)
    solver = _SINGLE_LEVEL[params.method]
    p1 = build_pyramid(f1, params.pyramid_scale, params.pyramid_min_dim, params.max_levels)
    p2 = build_pyramid(f2, params.pyramid_scale, params.pyramid_min_dim, params.max_levels)
    u = np.zeros(p1.levels[-1].shape)
    v = np.zeros(p1.levels[-1].shape)
    for level in range(len(p1) - 1, -1, -1):
        a = p1.levels[level]
        b = p2.levels[level]
        if u.shape != a.shape:
            u, v = _upscale_flow(u, v, a.shape[0], a.shape[1], params.pyramid_scale)
        for _ in range(params.warps_per_level):
            warped = _warp_toward(b, u, v)
            inc = solver(a, warped, params)
            u = u + inc.u
            v = v + inc.v
    return FlowField(u, v)


def to_velocity(flow: FlowField, frame_interval_minutes: float) -> VelocityField:
    """Convert pixels/frame to pixels/minute."""
    if frame_interval_minutes <= 0:
        raise InvalidInputError(f"frame interval must be positive, got {frame_interval_minutes}")
    return VelocityField(flow.u / frame_interval_minutes, flow.v / frame_interval_minutes)


def _edge_sq_sum(f: np.ndarray) -> float:
    dh = f[:, 1:] - f[:, :-1]
    dv = f[1:, :] - f[:-1, :]
    return float(np.sum(dh * dh) + np.sum(dv * dv))


def flow_energy(f1, f2, flow: FlowField, alpha: float) -> float:
    """Discrete objective the global solver descends.

    Sum of squared constancy residuals plus (alpha^2 / 4) times the sum of
    squared 4-neighbor differences of both components.  The per-pixel
    coupled update is exact block coordinate relaxation of this functional,
    so its value is non-increasing across sweeps.
    """
    residual = flow_residual(f1, f2, flow)
    data = float(np.sum(residual * residual))
    smooth = _edge_sq_sum(flow.u) + _edge_sq_sum(flow.v)
    return data + 0.25 * alpha * alpha * smooth


def flow_energy_gradient(f1, f2, flow: FlowField, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Analytic gradient of ``flow_energy`` w.r.t. the flow components."""
    f1, f2 = _check_pair(f1, f2)
    ix, iy, it = _gradients(f1, f2)
    residual = ix * flow.u + iy * flow.v + it
    gu = 2.0 * ix * residual + 2.0 * alpha * alpha * (flow.u - _neighbor_average(flow.u))
    gv = 2.0 * iy * residual + 2.0 * alpha * alpha * (flow.v - _neighbor_average(flow.v))
    return gu, gv


def energy_trace(f1, f2, params: FlowParams, sweeps: int, init: FlowField | None = None) -> np.ndarray:
    """Energy value after each of ``sweeps`` single Jacobi sweeps.

    Sweeps are chained one at a time, which is state-identical to one
    multi-sweep run; used for convergence diagnostics.
    """
    one = replace(params, iterations=1, method="horn_schunck")
    flow = init if init is not None else FlowField.zeros(*as_field(f1).shape)
    out = np.empty(sweeps)
    for i in range(sweeps):
        flow = horn_schunck(f1, f2, one, init=flow)
        out[i] = flow_energy(f1, f2, flow, params.alpha)
    return out
