"""The shared segmentation function used by both coarse and refine calls.

A predictor maps a 6-plane input (RGB image, positive/negative click disks,
previous mask) to a per-pixel foreground probability at the same dims.  The
engine holds exactly one predictor instance and routes every prediction,
coarse or refine, through it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Protocol, runtime_checkable

import numpy as np
from scipy import ndimage

from .clicks import ClickChannels


class PredictorError(Exception):
    """Backend failure surfaced to the engine; session state stays intact."""


@dataclass(frozen=True)
class PredictorCapabilities:
    concurrent_safe: bool = True
    fixed_input_dims: Optional[tuple[int, int]] = None


@dataclass
class PredictorInput:
    """Image + click planes + previous mask, all sharing (h, w)."""

    image: np.ndarray          # (h, w, 3) float in [0, 1]
    clicks: ClickChannels
    prev_mask: np.ndarray      # (h, w) bool or {0,1}

    def validate(self) -> None:
        h, w = self.image.shape[:2]
        if self.image.ndim != 3 or self.image.shape[2] != 3:
            raise ValueError(f"image must be (h, w, 3), got {self.image.shape}")
        for name, plane in (("positive", self.clicks.positive),
                            ("negative", self.clicks.negative),
                            ("prev_mask", self.prev_mask)):
            if plane.shape != (h, w):
                raise ValueError(f"{name} plane is {plane.shape}, image is {(h, w)}")

    @property
    def dims(self) -> tuple[int, int]:
        return self.image.shape[0], self.image.shape[1]


@runtime_checkable
class Predictor(Protocol):
    capabilities: PredictorCapabilities

    def predict(self, inp: PredictorInput) -> np.ndarray: ...


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


class ReferenceClickPredictor:
    """Deterministic classical stand-in for a trained network.

    Probability is sigmoid((d_neg - d_pos) / tau) gated by a color-affinity
    term exp(-||I - mean positive color||^2 / (2 sigma_c^2)), then blended
    with the previous mask (weight ``prev_blend`` on the fresh prediction)
    when that mask is nonempty.  d_pos / d_neg are Euclidean distances to the
    nearest encoded click pixel; with no negative clicks d_neg is capped at
    the image diagonal.  No positive clicks at all yields an all-zero output.

    The constants exist only to make the full click loop convergent on
    synthetic imagery; they are not calibrated to any trained model.
    """

    def __init__(self, tau: float = 16.0, color_sigma: float = 0.25,
                 prev_blend: float = 0.7):
        self.tau = float(tau)
        self.color_sigma = float(color_sigma)
        self.prev_blend = float(prev_blend)
        self.capabilities = PredictorCapabilities(concurrent_safe=True)

    def predict(self, inp: PredictorInput) -> np.ndarray:
        inp.validate()
        h, w = inp.dims
        pos = inp.clicks.positive > 0.5
        if not pos.any():
            return np.zeros((h, w), np.float32)
        neg = inp.clicks.negative > 0.5
        diag = math.hypot(h, w)
        d_pos = ndimage.distance_transform_edt(~pos)
        if neg.any():
            d_neg = np.minimum(ndimage.distance_transform_edt(~neg), diag)
        else:
            d_neg = np.full((h, w), diag)
        mean_color = inp.image[pos].reshape(-1, 3).mean(axis=0)
        color_d2 = np.sum((inp.image - mean_color) ** 2, axis=2)
        affinity = np.exp(-color_d2 / (2.0 * self.color_sigma ** 2))
        p = _sigmoid((d_neg - d_pos) / self.tau) * affinity
        prev = np.asarray(inp.prev_mask, np.float32)
        if prev.any():
            p = self.prev_blend * p + (1.0 - self.prev_blend) * prev
        return np.clip(p, 0.0, 1.0).astype(np.float32)
