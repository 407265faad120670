"""Walk one simulated annotation session through the full click loop.

Generates a synthetic blob image, then lets the deterministic corrective
annotator click until the mask matches the ground truth: the first five
clicks run the coarse global path, later clicks add local-patch refinement
and the selective merge.  Saves an overlay strip to demos/output/.
"""

from pathlib import Path

import numpy as np

from clore import raster
from clore.benchmark import DEFAULT_THRESHOLDS
from clore.clicks import next_corrective_click
from clore.pipeline import ClickEngine, SessionConfig
from clore.predictor import ReferenceClickPredictor
from clore.synthetic import make_blob_sample

OUT = Path(__file__).parent / "output"


def overlay(image, mask, clicks, patch=None):
    canvas = image.copy()
    canvas[mask] = 0.55 * canvas[mask] + 0.45 * np.array([0.1, 0.9, 0.2])
    for c in clicks:
        color = [0.0, 1.0, 0.0] if c.positive else [1.0, 0.0, 0.0]
        y0, y1 = max(0, c.y - 2), min(canvas.shape[0], c.y + 3)
        x0, x1 = max(0, c.x - 2), min(canvas.shape[1], c.x + 3)
        canvas[y0:y1, x0:x1] = color
    if patch is not None:
        canvas[patch.y1:patch.y2, [patch.x1, patch.x2 - 1]] = [1.0, 1.0, 0.0]
        canvas[[patch.y1, patch.y2 - 1], patch.x1:patch.x2] = [1.0, 1.0, 0.0]
    return canvas


def main():
    rng = np.random.default_rng(21)
    image, gt = make_blob_sample(rng, size=256)
    engine = ClickEngine(ReferenceClickPredictor(), SessionConfig(n_trigger=3))
    state = engine.new_session(image)

    frames = []
    print("click | polarity | phase   | local patch        | IoU    | ms")
    print("-" * 66)
    for k in range(1, 21):
        click = next_corrective_click(state.cur_mask, gt)
        if click is None:
            print(f"converged after {k - 1} clicks")
            break
        out = engine.add_click(state, click.y, click.x, click.positive)
        score = raster.iou(out.mask, gt)
        lp = "-" if out.local_patch is None else str(out.local_patch.as_tuple())
        pol = "pos" if click.positive else "neg"
        print(f"{k:5d} | {pol:8s} | {out.phase:7s} | {lp:18s} "
              f"| {score:.4f} | {out.elapsed_ms:5.1f}")
        frames.append(overlay(image, out.mask, state.clicks, out.local_patch))
        if score >= max(DEFAULT_THRESHOLDS):
            print(f"reached IoU {score:.3f} >= {max(DEFAULT_THRESHOLDS)}, stopping")
            break

    OUT.mkdir(exist_ok=True)
    strip = np.concatenate(frames[: min(6, len(frames))], axis=1)
    from PIL import Image

    Image.fromarray((strip * 255).astype(np.uint8)).save(OUT / "click_loop.png")
    print(f"saved overlay strip -> {OUT / 'click_loop.png'}")

    print("\nundo twice:")
    for _ in range(2):
        restored = engine.undo(state)
        print(f"  click_count={state.click_count} phase={restored.phase} "
              f"IoU={raster.iou(restored.mask, gt):.4f}")


if __name__ == "__main__":
    main()
