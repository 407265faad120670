"""The interactive click-loop engine.

Each click runs: crop ROI -> coarse global prediction.  Once the click count
passes the trigger ``n_trigger``, the loop additionally selects a Local Patch
around the newest click, re-predicts it at working resolution through the
same predictor, and merges only the disagreement component containing that
click back into the accepted mask.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import raster
from .clicks import Click, encode_clicks
from .predictor import Predictor, PredictorInput
from .raster import Rect


@dataclass
class SessionConfig:
    n_trigger: int = 5
    working_dims: int = 512
    gamma_expand: float = 1.4       # Local Patch expansion ratio
    crop_expand: float = 1.4        # coarse crop ROI expansion ratio
    click_radius: int = 5
    binarize_threshold: float = 0.5
    enforce_click_consistency: bool = True
    max_clicks: int = 20            # evaluation budget, not a session limit
    hard_click_cap: int = 64
    refine_clicks_in_patch_only: bool = True

    def __post_init__(self):
        if self.n_trigger < 1:
            raise ValueError("n_trigger must be >= 1")
        if not (0.0 < self.binarize_threshold < 1.0):
            raise ValueError("binarize_threshold must be in (0, 1)")
        if self.gamma_expand < 1.0 or self.crop_expand < 1.0:
            raise ValueError("expansion ratios must be >= 1")
        if self.hard_click_cap < self.max_clicks:
            raise ValueError("hard_click_cap must be >= max_clicks")


@dataclass
class StepOutput:
    mask: np.ndarray
    phase: str                      # "coarse" | "refined"
    local_patch: Optional[Rect]
    elapsed_ms: float


@dataclass
class _Snapshot:
    clicks: list[Click]
    prev_mask: np.ndarray
    cur_mask: np.ndarray
    crop_roi: Rect
    phase: str
    local_patch: Optional[Rect]


@dataclass
class SessionState:
    """One annotation session; mutated only by the engine, serially."""

    image: np.ndarray               # (h, w, 3) float32 in [0, 1]
    clicks: list[Click] = field(default_factory=list)
    prev_mask: np.ndarray = None    # accepted mask from the last iteration
    cur_mask: np.ndarray = None
    crop_roi: Rect = None
    undo_stack: list[_Snapshot] = field(default_factory=list)
    timing_log: list[float] = field(default_factory=list)
    phase: str = "coarse"
    local_patch: Optional[Rect] = None

    def __post_init__(self):
        h, w = self.image.shape[:2]
        if self.prev_mask is None:
            self.prev_mask = np.zeros((h, w), bool)
        if self.cur_mask is None:
            self.cur_mask = np.zeros((h, w), bool)
        if self.crop_roi is None:
            self.crop_roi = raster.full_rect((h, w))

    @property
    def dims(self) -> tuple[int, int]:
        return self.image.shape[0], self.image.shape[1]

    @property
    def click_count(self) -> int:
        return len(self.clicks)


def patch_transform(roi: Rect, dims):
    """Full-image -> patch coordinate map, half-pixel-center aligned."""
    sy = dims[0] / roi.height
    sx = dims[1] / roi.width

    def transform(y: float, x: float) -> tuple[float, float]:
        return ((y - roi.y1 + 0.5) * sy - 0.5,
                (x - roi.x1 + 0.5) * sx - 0.5)

    return transform


def compute_crop_roi(prev_mask: np.ndarray, clicks: list[Click], dims,
                     cfg: SessionConfig) -> Rect:
    """Crop region with a higher foreground ratio for the coarse pass.

    Skipped (full image) for the very first click.  Otherwise: bounding box
    of the accepted foreground plus every click pixel, expanded by
    ``crop_expand``, with a minimum side of working_dims/4 grown symmetrically
    within the image.
    """
    image_rect = raster.full_rect(dims)
    if not prev_mask.any() and len(clicks) <= 1:
        return image_rect
    ys = [c.y for c in clicks]
    xs = [c.x for c in clicks]
    box = raster.bounding_box(prev_mask)
    if box is not None:
        ys += [box.y1, box.y2 - 1]
        xs += [box.x1, box.x2 - 1]
    if not ys:
        return image_rect
    seed = Rect(min(ys), max(ys) + 1, min(xs), max(xs) + 1)
    roi = raster.expand_rect(seed, cfg.crop_expand, image_rect)
    min_side = cfg.working_dims // 4
    return _grow_to_min_side(roi, min_side, image_rect)


def _grow_axis(lo: int, hi: int, min_len: int, bound: int) -> tuple[int, int]:
    need = min(min_len, bound) - (hi - lo)
    if need <= 0:
        return lo, hi
    lo -= need // 2
    hi += need - need // 2
    if lo < 0:
        hi -= lo
        lo = 0
    if hi > bound:
        lo -= hi - bound
        hi = bound
    return max(lo, 0), hi


def _grow_to_min_side(r: Rect, min_side: int, clip: Rect) -> Rect:
    y1, y2 = _grow_axis(r.y1, r.y2, min_side, clip.y2)
    x1, x2 = _grow_axis(r.x1, r.x2, min_side, clip.x2)
    return Rect(y1, y2, x1, x2)


def _apply_click_consistency(mask: np.ndarray, clicks: list[Click]) -> None:
    for c in clicks:
        mask[c.y, c.x] = c.positive


def _predict_patch(image: np.ndarray, prev_mask: np.ndarray, roi: Rect,
                   clicks: list[Click], predictor: Predictor,
                   cfg: SessionConfig) -> np.ndarray:
    """Crop -> resize -> predict -> threshold -> resize back to ROI dims."""
    work = (cfg.working_dims, cfg.working_dims)
    if predictor.capabilities.fixed_input_dims is not None:
        work = predictor.capabilities.fixed_input_dims
    patch_img = image[roi.y1:roi.y2, roi.x1:roi.x2]
    patch_prev = prev_mask[roi.y1:roi.y2, roi.x1:roi.x2]
    channels = encode_clicks(clicks, work, cfg.click_radius,
                             patch_transform(roi, work))
    prob = predictor.predict(PredictorInput(
        raster.resize_image(patch_img, work),
        channels,
        raster.resize_mask(patch_prev, work)))
    binary = prob >= cfg.binarize_threshold
    return raster.resize_mask(binary, (roi.height, roi.width))


def coarse_step(image: np.ndarray, prev_mask: np.ndarray, clicks: list[Click],
                roi: Rect, predictor: Predictor, cfg: SessionConfig) -> np.ndarray:
    """Coarse global prediction: pixels outside the ROI keep the previous mask."""
    patch = _predict_patch(image, prev_mask, roi, clicks, predictor, cfg)
    out = prev_mask.copy()
    out[roi.y1:roi.y2, roi.x1:roi.x2] = patch
    if cfg.enforce_click_consistency:
        _apply_click_consistency(out, clicks)
    return out


def _click_square(y: int, x: int, side_basis: int, clip: Rect) -> Rect:
    side = max(1, round(0.4 * side_basis))
    y1 = y - side // 2
    x1 = x - side // 2
    square = Rect(y1, y1 + side, x1, x1 + side)
    clipped = square.intersect(clip)
    return clipped if clipped is not None else Rect(y, y + 1, x, x + 1)


def select_local_patch(m_c: np.ndarray, m_p: np.ndarray, r_g: Rect,
                       click: tuple[int, int], gamma: float) -> Rect:
    """Pick the refinement rectangle around the latest click.

    With no previous mask the patch is the coarse mask's bounding box.
    Otherwise the disagreement component at the click (largest component when
    the click saw no change) is boxed; if that box is under a third of the
    coarse box's area the patch becomes a square of side 0.4 * max coarse box
    side centered on the click.  The result is expanded by ``gamma`` and
    constrained to ``r_g``.
    """
    if m_c.shape != m_p.shape:
        raise ValueError(f"shape mismatch: {m_c.shape} vs {m_p.shape}")
    y, x = click
    image_rect = raster.full_rect(m_c.shape)

    def coarse_box_or_square() -> Rect:
        box = raster.bounding_box(m_c)
        if box is not None:
            return box
        return _click_square(y, x, max(r_g.height, r_g.width), image_rect)

    if not m_p.any():
        b = coarse_box_or_square()
    else:
        diff = raster.mask_xor(m_c, m_p)
        if not diff.any():
            b = coarse_box_or_square()
        else:
            labels, _ = raster.label_components(diff)
            label_id = labels[y, x]
            if label_id == 0:
                comp = raster.largest_component(raster.connected_components(diff))
                b_d = comp.bbox
            else:
                b_d = raster.bounding_box(labels == label_id)
            b_o = raster.bounding_box(m_c)
            if b_o is not None and 3 * b_d.area < b_o.area:
                b = _click_square(y, x, max(b_o.height, b_o.width), image_rect)
            else:
                b = b_d
    return raster.expand_rect(b, gamma, r_g)


def refine_step(image: np.ndarray, m_c: np.ndarray, lp: Rect,
                clicks: list[Click], predictor: Predictor,
                cfg: SessionConfig) -> np.ndarray:
    """Re-predict the Local Patch at working resolution and paste it into M_c."""
    if cfg.refine_clicks_in_patch_only:
        patch_clicks = [c for c in clicks if lp.contains_point(c.y, c.x)]
    else:
        patch_clicks = clicks
    patch = _predict_patch(image, m_c, lp, patch_clicks, predictor, cfg)
    out = m_c.copy()
    out[lp.y1:lp.y2, lp.x1:lp.x2] = patch
    if cfg.enforce_click_consistency:
        _apply_click_consistency(out, clicks)
    return out


def variance_merge(m_r: np.ndarray, m_p: np.ndarray, last_click: Click) -> np.ndarray:
    """Selective update: flip only the disagreement component at the click.

    Empty previous mask, or a click pixel that saw no change, accepts the
    refined mask wholesale; otherwise everything outside the click's
    disagreement component keeps the previous mask.
    """
    if m_r.shape != m_p.shape:
        raise ValueError(f"shape mismatch: {m_r.shape} vs {m_p.shape}")
    if not m_p.any():
        return m_r.copy()
    diff = raster.mask_xor(m_r, m_p)
    labels, _ = raster.label_components(diff)
    label_id = labels[last_click.y, last_click.x]
    if label_id == 0:
        return m_r.copy()
    out = m_p.copy()
    component = labels == label_id
    out[component] = m_r[component]
    return out


class ClickEngine:
    """Serialized per-session click loop over a single shared predictor."""

    def __init__(self, predictor: Predictor, cfg: Optional[SessionConfig] = None):
        self.predictor = predictor
        self.cfg = cfg if cfg is not None else SessionConfig()
        self._predict_lock = threading.Lock()

    def new_session(self, image: np.ndarray) -> SessionState:
        image = np.asarray(image, np.float32)
        if image.ndim == 2:
            image = np.repeat(image[:, :, None], 3, axis=2)
        if image.ndim != 3 or image.shape[2] != 3:
            raise ValueError(f"image must be (h, w[, 3]), got {image.shape}")
        return SessionState(image=np.clip(image, 0.0, 1.0))

    def _guarded(self, fn, *args):
        if self.predictor.capabilities.concurrent_safe:
            return fn(*args)
        with self._predict_lock:
            return fn(*args)

    def add_click(self, state: SessionState, y: int, x: int,
                  positive: bool) -> StepOutput:
        """Run one full iteration; on predictor failure the state is untouched."""
        h, w = state.dims
        if not (0 <= y < h and 0 <= x < w):
            raise ValueError(f"click ({y}, {x}) outside image {h}x{w}")
        if state.click_count >= self.cfg.hard_click_cap:
            raise ValueError(f"session exceeded {self.cfg.hard_click_cap} clicks")
        cfg = self.cfg
        click = Click(int(y), int(x), bool(positive), state.click_count + 1)
        clicks = state.clicks + [click]

        started = time.perf_counter()
        roi = compute_crop_roi(state.prev_mask, clicks, (h, w), cfg)
        m_c = self._guarded(coarse_step, state.image, state.prev_mask, clicks,
                            roi, self.predictor, cfg)
        if len(clicks) <= cfg.n_trigger:
            phase, lp, new_mask = "coarse", None, m_c
        else:
            lp = select_local_patch(m_c, state.prev_mask, roi, (click.y, click.x),
                                    cfg.gamma_expand)
            m_r = self._guarded(refine_step, state.image, m_c, lp, clicks,
                                self.predictor, cfg)
            new_mask = variance_merge(m_r, state.prev_mask, click)
            phase = "refined"
        elapsed = (time.perf_counter() - started) * 1000.0

        state.undo_stack.append(_Snapshot(
            state.clicks, state.prev_mask, state.cur_mask, state.crop_roi,
            state.phase, state.local_patch))
        state.clicks = clicks
        state.prev_mask = new_mask
        state.cur_mask = new_mask
        state.crop_roi = roi
        state.phase = phase
        state.local_patch = lp
        state.timing_log.append(elapsed)
        return StepOutput(new_mask.copy(), phase, lp, elapsed)

    def undo(self, state: SessionState) -> StepOutput:
        """Restore the snapshot taken before the most recent click."""
        if not state.undo_stack:
            raise IndexError("nothing to undo")
        snap = state.undo_stack.pop()
        state.clicks = snap.clicks
        state.prev_mask = snap.prev_mask
        state.cur_mask = snap.cur_mask
        state.crop_roi = snap.crop_roi
        state.phase = snap.phase
        state.local_patch = snap.local_patch
        state.timing_log = state.timing_log[:len(state.clicks)]
        return StepOutput(state.cur_mask.copy(), snap.phase, snap.local_patch, 0.0)
