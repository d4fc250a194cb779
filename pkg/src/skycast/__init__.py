"""Short-term cloud motion prediction from ground-based sky image sequences.

Pipeline: the blue/red ratio channel of two successive frames feeds a dense
optical-flow estimate, the flow extrapolates the newest frame forward, and
cascaded predictions are scored by binary sky/cloud pixel accuracy per lead
time.
"""

from .errors import InvalidInputError, SkycastError
from .flow import (
    FlowField,
    FlowParams,
    VelocityField,
    clg_flow,
    flow_energy,
    flow_energy_gradient,
    flow_residual,
    horn_schunck,
    lucas_kanade,
    pyramid_flow,
    to_velocity,
)
from .image import (
    Image,
    Pyramid,
    bilinear_sample,
    build_pyramid,
    gaussian_blur,
    ratio_channel,
    spatial_gradients,
    temporal_gradient,
)
from .predict import Forecast, cascade_predict, predict_next, warp_image
from .segment import AccuracyReport, BinaryMask, LeadAccuracy, accuracy, evaluate_sequence, segment
from .synthetic import SceneSpec, SyntheticSequence, endpoint_error, generate

__version__ = "0.1.0"

__all__ = [
    "AccuracyReport",
    "BinaryMask",
    "FlowField",
    "FlowParams",
    "Forecast",
    "Image",
    "InvalidInputError",
    "LeadAccuracy",
    "Pyramid",
    "SceneSpec",
    "SkycastError",
    "SyntheticSequence",
    "VelocityField",
    "accuracy",
    "bilinear_sample",
    "build_pyramid",
    "cascade_predict",
    "clg_flow",
    "endpoint_error",
    "evaluate_sequence",
    "flow_energy",
    "flow_energy_gradient",
    "flow_residual",
    "gaussian_blur",
    "generate",
    "horn_schunck",
    "lucas_kanade",
    "predict_next",
    "pyramid_flow",
    "ratio_channel",
    "segment",
    "spatial_gradients",
    "temporal_gradient",
    "to_velocity",
    "warp_image",
]
