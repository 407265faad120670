"""Seed-fixed synthetic image/mask suites for calibration and demos.

Each sample is a textured background with 1-3 convex colored blobs
(rotated ellipses sharing one per-image color family); the ground truth is
their union.
"""

from __future__ import annotations

import numpy as np


def _ellipse_mask(dims, center, axes, angle) -> np.ndarray:
    h, w = dims
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    dy = yy - center[0]
    dx = xx - center[1]
    cos_a, sin_a = np.cos(angle), np.sin(angle)
    u = dx * cos_a + dy * sin_a
    v = -dx * sin_a + dy * cos_a
    return (u / axes[1]) ** 2 + (v / axes[0]) ** 2 <= 1.0


def make_blob_sample(rng: np.random.Generator, size: int = 256):
    """One (image, mask) pair: convex blobs on a textured background.

    Blob colors share a family but drift per blob, so one click rarely
    activates every blob at once; faint background distractors in a related
    hue provoke occasional false positives.
    """
    base = rng.uniform(0.2, 0.35, size=3)
    yy, xx = np.mgrid[0:size, 0:size] / size
    waves = 0.05 * np.sin(2 * np.pi * (yy * rng.uniform(1, 4) + xx * rng.uniform(1, 4)))
    image = np.clip(base[None, None, :] + waves[:, :, None]
                    + rng.normal(0, 0.03, (size, size, 3)), 0, 1)

    # one channel runs hot to keep blobs separable from the background; the
    # cold channels drift per blob, with drift directions spread apart so
    # distinct blobs sit outside each other's color-affinity radius and each
    # needs its own click
    order = rng.permutation(3)
    family = np.array([rng.uniform(0.85, 0.95), rng.uniform(0.05, 0.2),
                       rng.uniform(0.3, 0.45)])[order]
    cold = [c for c in range(3) if c != int(np.nonzero(order == 0)[0][0])]
    n_blobs = int(rng.integers(1, 4))
    base_angle = rng.uniform(0, 2 * np.pi)
    mask = np.zeros((size, size), bool)
    for b in range(n_blobs):
        center = rng.uniform(0.18 * size, 0.82 * size, size=2)
        axes = rng.uniform(0.06 * size, 0.18 * size, size=2)
        blob = _ellipse_mask((size, size), center, axes, rng.uniform(0, np.pi))
        mask |= blob
        angle = base_angle + 2 * np.pi * b / 3.0
        magnitude = rng.uniform(0.2, 0.23)
        drift = np.zeros(3)
        drift[cold[0]] = magnitude * np.cos(angle)
        drift[cold[1]] = magnitude * np.sin(angle)
        color = np.clip(family + drift, 0.05, 0.95)
        image[blob] = color
        image[blob] += rng.normal(0, 0.02, (int(blob.sum()), 3))

    # washed family-colored smudges: distractors that light up with the blobs
    # and cost the annotator a negative click each; kept clear of the blobs so
    # corrective negatives stay local
    from scipy import ndimage as _ndimage

    keepout = _ndimage.binary_dilation(mask, iterations=12)
    for _ in range(int(rng.integers(0, 5))):
        center = rng.uniform(0.08 * size, 0.92 * size, size=2)
        axes = rng.uniform(0.03 * size, 0.09 * size, size=2)
        smudge = _ellipse_mask((size, size), center, axes, rng.uniform(0, np.pi))
        smudge &= ~keepout
        wash = rng.uniform(0.25, 0.4)
        tint = np.clip((1 - wash) * family + wash * base, 0, 1)
        image[smudge] = tint
        image[smudge] += rng.normal(0, 0.02, (int(smudge.sum()), 3))

    image = np.clip(image + rng.normal(0, 0.015, image.shape), 0, 1)
    return image.astype(np.float32), mask


def make_suite(n: int = 100, size: int = 256, seed: int = 17):
    """Deterministic list of (image, mask) pairs."""
    rng = np.random.default_rng(seed)
    samples = []
    while len(samples) < n:
        image, mask = make_blob_sample(rng, size)
        if mask.any() and not mask.all():
            samples.append((image, mask))
    return samples
