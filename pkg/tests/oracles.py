"""Independent brute-force oracles the tests check the library against.

Everything here is deliberately naive, pure-Python, and written against the
contracts rather than the library internals: flood fill instead of labeling,
O(N^2) distance scans, and a straight-line transcription of the local-patch
selection pseudocode.
"""

from __future__ import annotations

import math
from collections import deque

import numpy as np


def flood_fill_components(mask, connectivity: int = 4):
    """All connected components as sorted pixel lists, BFS flood fill."""
    h, w = mask.shape
    seen = np.zeros((h, w), bool)
    if connectivity == 4:
        steps = [(-1, 0), (1, 0), (0, -1), (0, 1)]
    else:
        steps = [(dy, dx) for dy in (-1, 0, 1) for dx in (-1, 0, 1)
                 if (dy, dx) != (0, 0)]
    components = []
    for sy in range(h):
        for sx in range(w):
            if not mask[sy, sx] or seen[sy, sx]:
                continue
            queue = deque([(sy, sx)])
            seen[sy, sx] = True
            pixels = []
            while queue:
                y, x = queue.popleft()
                pixels.append((y, x))
                for dy, dx in steps:
                    ny, nx = y + dy, x + dx
                    if 0 <= ny < h and 0 <= nx < w and mask[ny, nx] and not seen[ny, nx]:
                        seen[ny, nx] = True
                        queue.append((ny, nx))
            components.append(sorted(pixels))
    return components


def brute_force_boundary_distance(mask):
    """For each foreground pixel, min distance to any background pixel or to
    just outside the image; O(N^2) scan."""
    h, w = mask.shape
    bg = [(y, x) for y in range(-1, h + 1) for x in range(-1, w + 1)
          if not (0 <= y < h and 0 <= x < w) or not mask[y, x]]
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            if mask[y, x]:
                out[y, x] = min(math.hypot(y - by, x - bx) for by, bx in bg)
    return out


def naive_bbox(mask):
    """(y1, y2, x1, x2) half-open, by explicit scan; None when empty."""
    coords = [(y, x) for y in range(mask.shape[0])
              for x in range(mask.shape[1]) if mask[y, x]]
    if not coords:
        return None
    ys = [c[0] for c in coords]
    xs = [c[1] for c in coords]
    return (min(ys), max(ys) + 1, min(xs), max(xs) + 1)


def _oracle_expand(rect, ratio, clip):
    """Scale about center rounding outward, intersect with clip, 1x1 fallback."""
    y1, y2, x1, x2 = rect
    cy1, cy2, cx1, cx2 = clip
    ny1 = math.floor(((y1 + y2) - (y2 - y1) * ratio) / 2)
    ny2 = math.ceil(((y1 + y2) + (y2 - y1) * ratio) / 2)
    nx1 = math.floor(((x1 + x2) - (x2 - x1) * ratio) / 2)
    nx2 = math.ceil(((x1 + x2) + (x2 - x1) * ratio) / 2)
    iy1, iy2 = max(ny1, cy1), min(ny2, cy2)
    ix1, ix2 = max(nx1, cx1), min(nx2, cx2)
    if iy1 < iy2 and ix1 < ix2:
        return (iy1, iy2, ix1, ix2)
    py = min(max(math.floor((y1 + y2) / 2), cy1), cy2 - 1)
    px = min(max(math.floor((x1 + x2) / 2), cx1), cx2 - 1)
    return (py, py + 1, px, px + 1)


def _oracle_square(y, x, side_basis, h, w):
    side = max(1, round(0.4 * side_basis))
    y1 = y - side // 2
    x1 = x - side // 2
    y2, x2 = y1 + side, x1 + side
    iy1, iy2 = max(y1, 0), min(y2, h)
    ix1, ix2 = max(x1, 0), min(x2, w)
    if iy1 < iy2 and ix1 < ix2:
        return (iy1, iy2, ix1, ix2)
    return (y, y + 1, x, x + 1)


def local_patch_oracle(m_c, m_p, r_g, click, gamma):
    """Straight-line transcription of the patch-selection pseudocode.

    D <- M_c xor M_p; with an empty previous mask the box is the coarse
    bounding box; otherwise box the click's component of D (largest component
    when the click is outside D), switch to a 0.4*l square centered on the
    click when that box is under a third of the coarse box's area (l = max
    coarse box side), expand by gamma and intersect with r_g.  Empty-D and
    empty-coarse fallbacks: coarse bbox, then click square with l = max r_g
    side.  Area comparison, half-open rects throughout.
    """
    h, w = m_c.shape
    y, x = click

    def area(rect):
        return (rect[1] - rect[0]) * (rect[3] - rect[2])

    def coarse_box_or_square():
        box = naive_bbox(m_c)
        if box is not None:
            return box
        basis = max(r_g[1] - r_g[0], r_g[3] - r_g[2])
        return _oracle_square(y, x, basis, h, w)

    if not m_p.any():
        b = coarse_box_or_square()
    else:
        d = np.logical_xor(m_c, m_p)
        if not d.any():
            b = coarse_box_or_square()
        else:
            comps = flood_fill_components(d, 4)
            holding = [c for c in comps if (y, x) in c]
            if holding:
                chosen = holding[0]
            else:
                best_area = max(len(c) for c in comps)
                biggest = [c for c in comps if len(c) == best_area]
                chosen = min(biggest, key=lambda c: naive_bbox_key(c))
            b_d = pixels_bbox(chosen)
            b_o = naive_bbox(m_c)
            if b_o is not None and area(b_d) / area(b_o) < 1.0 / 3.0:
                b = _oracle_square(y, x, max(b_o[1] - b_o[0], b_o[3] - b_o[2]), h, w)
            else:
                b = b_d
    return _oracle_expand(b, gamma, r_g)


def pixels_bbox(pixels):
    ys = [p[0] for p in pixels]
    xs = [p[1] for p in pixels]
    return (min(ys), max(ys) + 1, min(xs), max(xs) + 1)


def naive_bbox_key(pixels):
    box = pixels_bbox(pixels)
    first = min(pixels)
    return (box[0], box[2], first[0], first[1])


def naive_rle(mask):
    """Run lengths by walking the flattened mask pixel by pixel."""
    flat = list(np.asarray(mask, bool).ravel())
    counts = []
    value = False
    run = 0
    for pixel in flat:
        if pixel == value:
            run += 1
        else:
            counts.append(run)
            value = pixel
            run = 1
    counts.append(run)
    return counts
