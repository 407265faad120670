"""Binary/probability raster primitives shared by the whole pipeline.

Masks are plain numpy arrays: a binary mask is a 2-D bool array (row-major,
shape ``(h, w)``), a probability mask is a 2-D float32 array with values in
[0, 1].  Rectangles are half-open on both axes: ``[y1, y2) x [x1, x2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

_FOUR_CONN = ndimage.generate_binary_structure(2, 1)
_EIGHT_CONN = ndimage.generate_binary_structure(2, 2)


@dataclass(frozen=True)
class Rect:
    """Half-open pixel rectangle [y1, y2) x [x1, x2)."""

    y1: int
    y2: int
    x1: int
    x2: int

    def __post_init__(self):
        if self.y1 >= self.y2 or self.x1 >= self.x2:
            raise ValueError(f"degenerate rect {self}")

    @property
    def height(self) -> int:
        return self.y2 - self.y1

    @property
    def width(self) -> int:
        return self.x2 - self.x1

    @property
    def area(self) -> int:
        return self.height * self.width

    def contains_point(self, y: int, x: int) -> bool:
        return self.y1 <= y < self.y2 and self.x1 <= x < self.x2

    def contains_rect(self, other: "Rect") -> bool:
        return (self.y1 <= other.y1 and other.y2 <= self.y2
                and self.x1 <= other.x1 and other.x2 <= self.x2)

    def intersect(self, other: "Rect") -> "Rect | None":
        y1, y2 = max(self.y1, other.y1), min(self.y2, other.y2)
        x1, x2 = max(self.x1, other.x1), min(self.x2, other.x2)
        if y1 >= y2 or x1 >= x2:
            return None
        return Rect(y1, y2, x1, x2)

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.y1, self.y2, self.x1, self.x2)


def full_rect(shape) -> Rect:
    """Rect covering an (h, w) image."""
    return Rect(0, int(shape[0]), 0, int(shape[1]))


@dataclass(frozen=True)
class Component:
    """One 4- (or 8-) connected foreground component."""

    ys: np.ndarray
    xs: np.ndarray
    area: int
    bbox: Rect

    def contains_point(self, y: int, x: int) -> bool:
        return bool(np.any((self.ys == y) & (self.xs == x)))

    def to_mask(self, shape) -> np.ndarray:
        m = np.zeros(shape, bool)
        m[self.ys, self.xs] = True
        return m


def _check_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")


def _structure(connectivity: int) -> np.ndarray:
    if connectivity == 4:
        return _FOUR_CONN
    if connectivity == 8:
        return _EIGHT_CONN
    raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")


def label_components(mask: np.ndarray, connectivity: int = 4):
    """Raw scipy labeling (labels array, count); fast path for internal use."""
    return ndimage.label(mask, structure=_structure(connectivity))


def connected_components(mask: np.ndarray, connectivity: int = 4) -> list[Component]:
    """All foreground components, ordered by (bbox.y1, bbox.x1, first pixel).

    Components partition the foreground; 4-connected by default.
    """
    labels, n = label_components(mask, connectivity)
    if n == 0:
        return []
    ys, xs = np.nonzero(labels)
    ids = labels[ys, xs]
    order = np.argsort(ids, kind="stable")  # nonzero() is row-major, so stable
    ys, xs, ids = ys[order], xs[order], ids[order]
    bounds = np.searchsorted(ids, np.arange(1, n + 2))
    comps = []
    for i in range(n):
        cy = ys[bounds[i]:bounds[i + 1]]
        cx = xs[bounds[i]:bounds[i + 1]]
        bbox = Rect(int(cy.min()), int(cy.max()) + 1, int(cx.min()), int(cx.max()) + 1)
        comps.append(Component(cy, cx, len(cy), bbox))
    comps.sort(key=lambda c: (c.bbox.y1, c.bbox.x1, int(c.ys[0]), int(c.xs[0])))
    return comps


def component_containing(components: list[Component], point) -> Component | None:
    """The unique component whose pixel set contains (y, x), if any."""
    y, x = point
    for c in components:
        if c.bbox.contains_point(y, x) and c.contains_point(y, x):
            return c
    return None


def largest_component(components: list[Component]) -> Component | None:
    """Max-area component; ties go to the earliest bbox in row-major order."""
    best = None
    for c in components:  # list is already bbox-ordered
        if best is None or c.area > best.area:
            best = c
    return best


def mask_xor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    _check_same_shape(a, b)
    return np.logical_xor(a, b)


def bounding_box(mask: np.ndarray) -> Rect | None:
    """Tightest half-open rect around the foreground; None when empty."""
    ys, xs = np.nonzero(mask)
    if len(ys) == 0:
        return None
    return Rect(int(ys.min()), int(ys.max()) + 1, int(xs.min()), int(xs.max()) + 1)


def expand_rect(r: Rect, ratio: float, clip: Rect) -> Rect:
    """Scale ``r`` about its center by ``ratio`` (rounded outward), clip to ``clip``.

    The scaled edges are floor((y1+y2 - h*ratio)/2) / ceil((y1+y2 + h*ratio)/2);
    ratio 1 with a covering clip is the identity.  An empty intersection falls
    back to the 1x1 rect inside ``clip`` nearest the center of ``r`` so the
    pipeline stays total.
    """
    if ratio < 1.0:
        raise ValueError(f"ratio must be >= 1, got {ratio}")
    ny1 = math.floor(((r.y1 + r.y2) - r.height * ratio) / 2)
    ny2 = math.ceil(((r.y1 + r.y2) + r.height * ratio) / 2)
    nx1 = math.floor(((r.x1 + r.x2) - r.width * ratio) / 2)
    nx2 = math.ceil(((r.x1 + r.x2) + r.width * ratio) / 2)
    out = Rect(ny1, ny2, nx1, nx2).intersect(clip)
    if out is not None:
        return out
    cy = min(max(math.floor((r.y1 + r.y2) / 2), clip.y1), clip.y2 - 1)
    cx = min(max(math.floor((r.x1 + r.x2) / 2), clip.x1), clip.x2 - 1)
    return Rect(cy, cy + 1, cx, cx + 1)


def _nearest_index_map(src_len: int, dst_len: int) -> np.ndarray:
    # half-pixel-center alignment, same convention as the bilinear path
    centers = (np.arange(dst_len) + 0.5) * (src_len / dst_len) - 0.5
    return np.clip(np.rint(centers), 0, src_len - 1).astype(np.intp)


def resize_mask(src: np.ndarray, dims) -> np.ndarray:
    """Nearest-neighbor resize of a bool mask to (h, w)."""
    h, w = int(dims[0]), int(dims[1])
    if h <= 0 or w <= 0:
        raise ValueError(f"bad target dims {dims}")
    if (h, w) == src.shape:
        return src.copy()
    yi = _nearest_index_map(src.shape[0], h)
    xi = _nearest_index_map(src.shape[1], w)
    return src[np.ix_(yi, xi)]


def resize_prob(src: np.ndarray, dims) -> np.ndarray:
    """Bilinear resize of a [0,1] float plane, half-pixel-center aligned."""
    import cv2

    h, w = int(dims[0]), int(dims[1])
    if h <= 0 or w <= 0:
        raise ValueError(f"bad target dims {dims}")
    out = cv2.resize(src.astype(np.float32), (w, h), interpolation=cv2.INTER_LINEAR)
    return np.clip(out, 0.0, 1.0)


def resize_image(src: np.ndarray, dims) -> np.ndarray:
    """Bilinear resize of an (h, w, 3) float image."""
    import cv2

    h, w = int(dims[0]), int(dims[1])
    out = cv2.resize(src.astype(np.float32), (w, h), interpolation=cv2.INTER_LINEAR)
    return np.clip(out, 0.0, 1.0)


def boundary_distance(mask: np.ndarray) -> np.ndarray:
    """Per-pixel Euclidean distance to the nearest background pixel or border.

    Background pixels get 0; the image border counts as background, so a
    foreground pixel on the edge gets 1.0.
    """
    padded = np.pad(mask, 1, constant_values=False)
    return ndimage.distance_transform_edt(padded)[1:-1, 1:-1]


def iou(a: np.ndarray, b: np.ndarray) -> float:
    """Intersection over union; both-empty counts as 1.0."""
    _check_same_shape(a, b)
    union = int(np.logical_or(a, b).sum())
    if union == 0:
        return 1.0
    inter = int(np.logical_and(a, b).sum())
    return inter / union


def dice(a: np.ndarray, b: np.ndarray) -> float:
    """Dice coefficient 2|a&b| / (|a|+|b|); both-empty counts as 1.0."""
    _check_same_shape(a, b)
    total = int(a.sum()) + int(b.sum())
    if total == 0:
        return 1.0
    inter = int(np.logical_and(a, b).sum())
    return 2.0 * inter / total
