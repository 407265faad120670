"""Generate training-style annotation states without any learning.

Random initial clicks (exponentially decaying counts), a few corrective
rounds against the current prediction, an occasional click reset, and out
comes a (previous mask, corrective click) pair, the input state an external
trainer would consume.
"""

import numpy as np

from clore import raster
from clore.clicks import SimulationConfig, sample_initial_clicks, \
    simulate_training_state
from clore.predictor import ReferenceClickPredictor
from clore.synthetic import make_blob_sample


def main():
    rng = np.random.default_rng(8)
    image, gt = make_blob_sample(rng, size=128)
    predictor = ReferenceClickPredictor()

    print("initial click counts over 2000 draws (decay 0.7):")
    counts = np.zeros(25, int)
    cfg = SimulationConfig(decay=0.7)
    draw_rng = np.random.default_rng(1)
    for _ in range(2000):
        k = sum(c.positive for c in sample_initial_clicks(gt, cfg, draw_rng))
        counts[k] += 1
    for k in range(1, 8):
        print(f"  k={k}: {'#' * (counts[k] // 20)} {counts[k]}")

    print("\nstate rollouts (seeded, reproducible):")
    for seed in range(5):
        rounds = int(np.random.default_rng(seed).integers(0, 4))
        cfg = SimulationConfig(corrective_rounds=rounds, seed=seed)
        mask, corrective = simulate_training_state(image, gt, predictor, cfg)
        quality = raster.iou(mask, gt)
        if corrective is None:
            tail = "converged, no corrective click needed"
        else:
            pol = "positive" if corrective.positive else "negative"
            tail = f"next corrective: {pol} at ({corrective.y}, {corrective.x})"
        print(f"  seed {seed}: {rounds} corrective rounds, "
              f"state IoU {quality:.3f}, {tail}")


if __name__ == "__main__":
    main()
