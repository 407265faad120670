"""Dataset ingestion and training-style augmentation.

Expected layout: ``<root>/images/<id>.png`` (8-bit RGB or gray) next to
``<root>/masks/<id>.png`` where any nonzero pixel is foreground.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from . import raster


@dataclass(frozen=True)
class DatasetRecord:
    id: str
    image_path: Path
    mask_path: Path

    def load_image(self) -> np.ndarray:
        img = Image.open(self.image_path).convert("RGB")
        return np.asarray(img, np.float32) / 255.0

    def load_mask(self) -> np.ndarray:
        mask = Image.open(self.mask_path).convert("L")
        return np.asarray(mask) > 0


def load_dataset(root) -> list[DatasetRecord]:
    """Scan a root for matching image/mask pairs, sorted by id.

    Orphans, undecodable files, dimension mismatches, and empty masks are
    skipped with a warning each.
    """
    root = Path(root)
    image_dir = root / "images"
    mask_dir = root / "masks"
    if not image_dir.is_dir() or not mask_dir.is_dir():
        raise FileNotFoundError(f"{root} must contain images/ and masks/")
    records = []
    for image_path in sorted(image_dir.iterdir()):
        if not image_path.is_file():
            continue
        stem = image_path.stem
        mask_path = mask_dir / f"{stem}.png"
        if not mask_path.is_file():
            warnings.warn(f"{stem}: no matching mask, skipped")
            continue
        record = DatasetRecord(stem, image_path, mask_path)
        try:
            image = record.load_image()
            mask = record.load_mask()
        except Exception as e:
            warnings.warn(f"{stem}: undecodable ({e}), skipped")
            continue
        if image.shape[:2] != mask.shape:
            warnings.warn(f"{stem}: image {image.shape[:2]} vs mask {mask.shape}, skipped")
            continue
        if not mask.any():
            warnings.warn(f"{stem}: mask has no foreground, skipped")
            continue
        records.append(record)
    records.sort(key=lambda r: r.id)
    return records


def truncated_normal(rng: np.random.Generator, mean: float, std: float,
                     low: float, high: float) -> float:
    """Rejection-sampled truncated normal draw."""
    while True:
        value = rng.normal(mean, std)
        if low <= value <= high:
            return float(value)


def _center_fit(plane: np.ndarray, size: int, fill=0):
    """Center-crop or center-pad a 2-D (or 3-D) plane to size x size."""
    h, w = plane.shape[:2]
    out_shape = (size, size) + plane.shape[2:]
    out = np.full(out_shape, fill, dtype=plane.dtype)
    sy = max(0, (h - size) // 2)
    sx = max(0, (w - size) // 2)
    dy = max(0, (size - h) // 2)
    dx = max(0, (size - w) // 2)
    ch = min(h, size)
    cw = min(w, size)
    out[dy:dy + ch, dx:dx + cw] = plane[sy:sy + ch, sx:sx + cw]
    return out


def augment_sample(image: np.ndarray, mask: np.ndarray,
                   rng: np.random.Generator, target: int = 512,
                   flip_probability: float = 0.3):
    """Random scale (truncated normal 0.8 +/- 0.4 on [0.3, 1.3]), center
    pad/crop to ``target``, and independent horizontal/vertical flips."""
    scale = truncated_normal(rng, 0.8, 0.4, 0.3, 1.3)
    h, w = mask.shape
    new_dims = (max(1, round(h * scale)), max(1, round(w * scale)))
    if new_dims != (h, w):
        image = raster.resize_image(image, new_dims)
        mask = raster.resize_mask(mask, new_dims)
    image = _center_fit(image, target, 0.0)
    mask = _center_fit(mask, target, False)
    if rng.random() < flip_probability:
        image = image[:, ::-1].copy()
        mask = mask[:, ::-1].copy()
    if rng.random() < flip_probability:
        image = image[::-1, :].copy()
        mask = mask[::-1, :].copy()
    return image, mask
