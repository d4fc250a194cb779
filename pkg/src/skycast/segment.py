"""Binary sky/cloud labeling and the lead-time accuracy metric.

Segmentation thresholds the ratio channel at the split maximizing
between-class variance over a 256-bin histogram spanning [-1, 1].  High
ratio values (blue-dominant pixels) are sky, low values are cloud.  Frames
whose histogram carries no usable bimodal structure fall back to a fixed
whole-frame ratio cut.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .flow import FlowParams
from .image import Image, ratio_channel
from .predict import cascade_predict

__all__ = ["BinaryMask", "AccuracyReport", "LeadAccuracy", "segment", "accuracy", "evaluate_sequence"]

HISTOGRAM_BINS = 256
# Whole-frame fallback: a frame with a flat ratio histogram is all sky when
# its mean ratio clears this value, otherwise all cloud.
FALLBACK_THRESHOLD = 0.25
UNIMODAL_VARIANCE_FLOOR = 1e-6

METHOD_ID = "ratio-otsu"


@dataclass(frozen=True)
class BinaryMask:
    """Per-pixel labels; True = sky, False = cloud."""

    sky: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.sky)
        if arr.ndim != 2:
            raise InvalidInputError(f"mask must be 2-D, got shape {arr.shape}")
        object.__setattr__(self, "sky", arr.astype(bool))

    @property
    def height(self) -> int:
        return self.sky.shape[0]

    @property
    def width(self) -> int:
        return self.sky.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.sky.shape

    def complement(self) -> "BinaryMask":
        return BinaryMask(~self.sky)


@dataclass(frozen=True)
class LeadAccuracy:
    lead_minutes: float
    accuracy: float
    n_frames: int


@dataclass(frozen=True)
class AccuracyReport:
    """Mean pixel accuracy per lead time, rows ordered by lead."""

    rows: list
    method: str = METHOD_ID

    def __post_init__(self):
        leads = [r.lead_minutes for r in self.rows]
        if any(b <= a for a, b in zip(leads, leads[1:])):
            raise InvalidInputError("lead times must be strictly increasing")
        for r in self.rows:
            if not 0.0 <= r.accuracy <= 1.0:
                raise InvalidInputError(f"accuracy out of range: {r.accuracy}")
            if r.n_frames < 1:
                raise InvalidInputError("each row needs at least one frame")


def _ratio_threshold(ratio: np.ndarray) -> float | None:
    """Between-class-variance maximizing split; None if effectively unimodal."""
    idx = ((ratio + 1.0) * (HISTOGRAM_BINS / 2.0)).astype(np.intp)
    np.clip(idx, 0, HISTOGRAM_BINS - 1, out=idx)
    counts = np.bincount(idx.ravel(), minlength=HISTOGRAM_BINS).astype(np.float64)
    total = counts.sum()
    p = counts / total
    centers = -1.0 + (np.arange(HISTOGRAM_BINS) + 0.5) * (2.0 / HISTOGRAM_BINS)
    w0 = np.cumsum(p)
    m0 = np.cumsum(p * centers)
    mean_total = m0[-1]
    w1 = 1.0 - w0
    valid = (w0 > 0) & (w1 > 0)
    sigma_b = np.zeros(HISTOGRAM_BINS)
    mu0 = np.divide(m0, w0, out=np.zeros_like(m0), where=valid)
    mu1 = np.divide(mean_total - m0, w1, out=np.zeros_like(m0), where=valid)
    diff = mu0 - mu1
    sigma_b[valid] = (w0 * w1 * diff * diff)[valid]
    best = int(np.argmax(sigma_b))
    if sigma_b[best] < UNIMODAL_VARIANCE_FLOOR:
        return None
    return -1.0 + (best + 1) * (2.0 / HISTOGRAM_BINS)


def segment(img: Image) -> BinaryMask:
    """Label pixels sky/cloud from the ratio channel."""
    if img.channels != 3:
        raise InvalidInputError(f"segmentation needs an RGB image, got {img.channels} channel(s)")
    ratio = ratio_channel(img)
    theta = _ratio_threshold(ratio)
    if theta is None:
        all_sky = bool(ratio.mean() >= FALLBACK_THRESHOLD)
        return BinaryMask(np.full(ratio.shape, all_sky, dtype=bool))
    return BinaryMask(ratio >= theta)


def accuracy(predicted: BinaryMask, actual: BinaryMask, roi: BinaryMask | None = None) -> float:
    """Fraction of pixels with matching labels, optionally within a region."""
    if predicted.shape != actual.shape:
        raise InvalidInputError(f"mask shapes differ: {predicted.shape} vs {actual.shape}")
    agree = predicted.sky == actual.sky
    if roi is None:
        return float(np.mean(agree))
    if roi.shape != actual.shape:
        raise InvalidInputError(f"roi shape {roi.shape} does not match masks {actual.shape}")
    selected = roi.sky
    if not selected.any():
        raise InvalidInputError("roi selects no pixels")
    return float(np.mean(agree[selected]))


def _interval_minutes(t0, t1) -> float:
    delta = t1 - t0
    if hasattr(delta, "total_seconds"):
        return delta.total_seconds() / 60.0
    return float(delta)


def evaluate_sequence(
    frames: list,
    max_lead_steps: int,
    params: FlowParams,
    roi: BinaryMask | None = None,
) -> AccuracyReport:
    """Score cascaded forecasts against observed frames, per lead time.

    ``frames`` is an ordered list of (timestamp, Image) with near-uniform
    spacing; timestamps may be datetimes or plain minute values.  For each
    anchor with enough history and future, a ``max_lead_steps``-deep cascade
    is predicted and each step's segmentation is compared with the
    segmentation of the frame actually observed at that lead.  Accuracies
    are averaged over anchors in index order.
    """
    if max_lead_steps < 1:
        raise InvalidInputError(f"max_lead_steps must be at least 1, got {max_lead_steps}")
    n = len(frames)
    if n < max_lead_steps + 2:
        raise InvalidInputError(
            f"need at least {max_lead_steps + 2} frames for {max_lead_steps} lead steps, got {n}"
        )
    times = [t for t, _ in frames]
    diffs = [_interval_minutes(a, b) for a, b in zip(times, times[1:])]
    nominal = float(np.median(diffs))
    if nominal <= 0:
        raise InvalidInputError("timestamps must be strictly increasing")
    for i, d in enumerate(diffs):
        if not 0.9 * nominal <= d <= 1.1 * nominal:
            raise InvalidInputError(
                f"irregular spacing between frames {i} ({times[i]}) and {i + 1} ({times[i + 1]}): "
                f"{d:g} min vs nominal {nominal:g} min"
            )
    actual_masks = [segment(img) for _, img in frames]
    sums = np.zeros(max_lead_steps)
    anchors = 0
    for i in range(1, n - max_lead_steps):
        forecast = cascade_predict(
            frames[i - 1][1],
            frames[i][1],
            max_lead_steps,
            params,
            frame_interval=nominal,
            base_time=times[i],
        )
        for k in range(1, max_lead_steps + 1):
            sums[k - 1] += accuracy(segment(forecast.frames[k - 1]), actual_masks[i + k], roi)
        anchors += 1
    rows = [
        LeadAccuracy(lead_minutes=k * nominal, accuracy=sums[k - 1] / anchors, n_frames=anchors)
        for k in range(1, max_lead_steps + 1)
    ]
    return AccuracyReport(rows=rows, method=METHOD_ID)
