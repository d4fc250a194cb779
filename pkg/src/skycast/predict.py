"""Frame extrapolation by flow-compensated warping.

One step estimates displacement between the two most recent ratio channels
and pushes the newest RGB frame forward by that displacement (constant
velocity over one interval).  Longer lead times chain the step, feeding
predicted frames back in as inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime

import numpy as np

from .errors import InvalidInputError
from .flow import FlowField, FlowParams, pyramid_flow
from .image import Image, bilinear_sample, ratio_channel

__all__ = ["Forecast", "warp_image", "predict_next", "cascade_predict"]


@dataclass(frozen=True)
class Forecast:
    """Predicted frames at base_time + k * frame_interval, k = 1..n."""

    frames: list
    flows: list
    frame_interval: float = 2.0
    base_time: datetime | None = None

    def __post_init__(self):
        if len(self.frames) != len(self.flows) or not self.frames:
            raise InvalidInputError("forecast needs matching, non-empty frame and flow lists")

    @property
    def steps(self) -> int:
        return len(self.frames)


def warp_image(img: Image, flow: FlowField) -> Image:
    """Backward-warp every channel: out(p) = channel(p - flow(p)).

    Sampling is clamped to the frame, so content flowing in from outside
    replicates the border.  Output samples are convex combinations of input
    samples and therefore stay inside the input's value range.
    """
    if flow.shape != img.shape:
        raise InvalidInputError(f"flow shape {flow.shape} does not match image {img.shape}")
    gx, gy = np.meshgrid(
        np.arange(img.width, dtype=np.float64),
        np.arange(img.height, dtype=np.float64),
    )
    xs = gx - flow.u
    ys = gy - flow.v
    warped = [bilinear_sample(img.channel(c), xs, ys) for c in range(img.channels)]
    return Image.from_channels(*warped)


def predict_next(frame_prev: Image, frame_cur: Image, params: FlowParams) -> tuple[Image, FlowField]:
    """One-interval forecast from two observed (or predicted) RGB frames.

    Returns the predicted frame and the displacement field that produced it.
    The displacement is estimated once on the ratio channels and applied to
    all three color channels.
    """
    if frame_prev.channels != 3 or frame_cur.channels != 3:
        raise InvalidInputError("prediction needs 3-channel frames")
    if frame_prev.shape != frame_cur.shape:
        raise InvalidInputError(
            f"frame shapes differ: {frame_prev.shape} vs {frame_cur.shape}"
        )
    flow = pyramid_flow(ratio_channel(frame_prev), ratio_channel(frame_cur), params)
    return warp_image(frame_cur, flow), flow


def cascade_predict(
    frame_prev: Image,
    frame_cur: Image,
    steps: int,
    params: FlowParams,
    frame_interval: float = 2.0,
    base_time: datetime | None = None,
) -> Forecast:
    """Chain one-step predictions, re-estimating flow from the latest pair.

    Step 1 uses the two observed frames; step k uses the previous two
    predictions (with the observed current frame standing in at k = 2).
    """
    if steps < 1:
        raise InvalidInputError(f"steps must be at least 1, got {steps}")
    frames: list[Image] = []
    flows: list[FlowField] = []
    older, newer = frame_prev, frame_cur
    for _ in range(steps):
        predicted, flow = predict_next(older, newer, params)
        frames.append(predicted)
        flows.append(flow)
        older, newer = newer, predicted
    return Forecast(frames=frames, flows=flows, frame_interval=frame_interval, base_time=base_time)
