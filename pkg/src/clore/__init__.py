"""Clore: click-driven interactive segmentation with triggered local refinement."""

from .clicks import Click, ClickChannels, SimulationConfig, encode_clicks, \
    next_corrective_click, sample_initial_clicks, simulate_training_state
from .pipeline import ClickEngine, SessionConfig, SessionState, StepOutput, \
    compute_crop_roi, select_local_patch, variance_merge
from .predictor import Predictor, PredictorCapabilities, PredictorError, \
    PredictorInput, ReferenceClickPredictor
from .raster import Component, Rect, bounding_box, boundary_distance, \
    connected_components, component_containing, dice, expand_rect, iou, \
    largest_component, mask_xor, resize_mask, resize_prob

__all__ = [
    "Click", "ClickChannels", "SimulationConfig", "encode_clicks",
    "next_corrective_click", "sample_initial_clicks", "simulate_training_state",
    "ClickEngine", "SessionConfig", "SessionState", "StepOutput",
    "compute_crop_roi", "select_local_patch", "variance_merge",
    "Predictor", "PredictorCapabilities", "PredictorError", "PredictorInput",
    "ReferenceClickPredictor",
    "Component", "Rect", "bounding_box", "boundary_distance",
    "connected_components", "component_containing", "dice", "expand_rect",
    "iou", "largest_component", "mask_xor", "resize_mask", "resize_prob",
]

__version__ = "0.1.0"
