"""Click representation, disk encoding, and the simulated annotator."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import raster

CoordTransform = Callable[[float, float], tuple[float, float]]


@dataclass(frozen=True)
class Click:
    """One user interaction: (y, x) in full-image space plus polarity."""

    y: int
    x: int
    positive: bool
    index: int = 1


@dataclass
class ClickChannels:
    """Positive/negative click planes, {0,1}-valued, patch-shaped."""

    positive: np.ndarray
    negative: np.ndarray


@dataclass
class SimulationConfig:
    """Knobs for the random-click annotator simulation."""

    max_positive: int = 24
    max_negative: int = 24
    decay: float = 0.7
    corrective_rounds: int = 3
    reset_probability: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if not (0 < self.decay):
            raise ValueError("decay must be > 0")
        if not (0 <= self.corrective_rounds <= 3):
            raise ValueError("corrective_rounds must be in [0, 3]")
        if not (0.0 <= self.reset_probability <= 1.0):
            raise ValueError("reset_probability must be in [0, 1]")

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def encode_clicks(clicks, dims, radius: int,
                  transform: Optional[CoordTransform] = None) -> ClickChannels:
    """Rasterize clicks as filled disks into per-polarity planes.

    Each click is mapped through ``transform`` (full-image -> patch coords);
    pixels within Euclidean distance <= radius of the mapped center are set.
    Clicks whose mapped center lands outside [0,h) x [0,w) are dropped.
    """
    if radius < 1:
        raise ValueError("radius must be >= 1")
    h, w = int(dims[0]), int(dims[1])
    pos = np.zeros((h, w), np.float32)
    neg = np.zeros((h, w), np.float32)
    r2 = float(radius) ** 2
    for c in clicks:
        py, px = (c.y, c.x) if transform is None else transform(c.y, c.x)
        if not (0 <= py < h and 0 <= px < w):
            continue
        y0 = max(0, math.ceil(py - radius))
        y1 = min(h - 1, math.floor(py + radius))
        x0 = max(0, math.ceil(px - radius))
        x1 = min(w - 1, math.floor(px + radius))
        yy, xx = np.mgrid[y0:y1 + 1, x0:x1 + 1]
        disk = (yy - py) ** 2 + (xx - px) ** 2 <= r2
        plane = pos if c.positive else neg
        plane[y0:y1 + 1, x0:x1 + 1][disk] = 1.0
    return ClickChannels(pos, neg)


def _truncated_geometric(rng: np.random.Generator, lo: int, hi: int, decay: float) -> int:
    ks = np.arange(lo, hi + 1)
    weights = np.power(float(decay), ks.astype(np.float64))
    return int(rng.choice(ks, p=weights / weights.sum()))


def sample_initial_clicks(gt: np.ndarray, cfg: SimulationConfig,
                          rng: Optional[np.random.Generator] = None) -> list[Click]:
    """Random positive/negative clicks on a ground-truth mask.

    Counts follow P(k) proportional to decay^k: positives on [1, max_positive],
    negatives on [0, max_negative].  Positions are uniform over foreground /
    background pixels.  Fully reproducible under a fixed generator.
    """
    if rng is None:
        rng = cfg.rng()
    fg = np.flatnonzero(gt)
    bg = np.flatnonzero(~gt)
    if len(fg) == 0 or len(bg) == 0:
        raise ValueError("ground truth needs both foreground and background")
    w = gt.shape[1]
    k_pos = _truncated_geometric(rng, 1, cfg.max_positive, cfg.decay)
    k_neg = _truncated_geometric(rng, 0, cfg.max_negative, cfg.decay)
    clicks = []
    for flat in rng.choice(fg, size=k_pos, replace=True):
        clicks.append(Click(int(flat) // w, int(flat) % w, True, len(clicks) + 1))
    for flat in rng.choice(bg, size=k_neg, replace=True):
        clicks.append(Click(int(flat) // w, int(flat) % w, False, len(clicks) + 1))
    return clicks


def next_corrective_click(pred: np.ndarray, gt: np.ndarray) -> Optional[Click]:
    """Deterministic corrective oracle: click the interior of the worst error.

    Takes the largest connected component of pred XOR gt and clicks its pixel
    farthest from the component boundary (row-major first on ties).  Polarity
    is positive for missed foreground, negative for spurious foreground.
    Returns None when pred already equals gt.
    """
    err = raster.mask_xor(pred, gt)
    comps = raster.connected_components(err)
    comp = raster.largest_component(comps)
    if comp is None:
        return None
    dist = raster.boundary_distance(comp.to_mask(err.shape))
    y, x = np.unravel_index(int(np.argmax(dist)), dist.shape)
    return Click(int(y), int(x), positive=bool(gt[y, x]))


def simulate_training_state(image: np.ndarray, gt: np.ndarray, predictor,
                            cfg: SimulationConfig,
                            rng: Optional[np.random.Generator] = None,
                            click_radius: int = 5):
    """Gradient-free annotation-state rollout for external training.

    Samples initial clicks, runs ``cfg.corrective_rounds`` predict/correct
    iterations (with at most one click reset drawn at ``reset_probability``),
    then returns the resulting mask plus one further corrective click (None
    when converged).  No learning happens here; the predictor is only queried.
    """
    from .predictor import PredictorInput

    if rng is None:
        rng = cfg.rng()
    clicks = sample_initial_clicks(gt, cfg, rng)
    prev = np.zeros(gt.shape, bool)
    dims = gt.shape
    did_reset = False

    def run_predictor():
        ch = encode_clicks(clicks, dims, click_radius)
        prob = predictor.predict(PredictorInput(image, ch, prev))
        return prob >= 0.5

    for _ in range(cfg.corrective_rounds):
        mask = run_predictor()
        prev = mask
        if not did_reset and rng.random() < cfg.reset_probability:
            clicks = []
            did_reset = True
            continue
        c = next_corrective_click(mask, gt)
        if c is None:
            break
        clicks.append(Click(c.y, c.x, c.positive, len(clicks) + 1))

    final = run_predictor()
    return final, next_corrective_click(final, gt)
