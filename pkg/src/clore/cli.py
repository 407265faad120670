"""Unified command line: serve the HTTP API, run benchmarks, trace sessions."""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .benchmark import (ablation_sweep, emit_report, format_ablation_table,
                        run_benchmark, run_session)
from .pipeline import SessionConfig
from .service import predictor_from_spec, rle_encode


def _session_config(args) -> SessionConfig:
    return SessionConfig(n_trigger=args.n, gamma_expand=args.gamma,
                         max_clicks=args.max_clicks)


def _dataset_samples(root):
    from .data import load_dataset

    records = load_dataset(root)
    if not records:
        sys.exit(f"no usable records under {root}")
    for record in records:
        yield record.id, record.load_image(), record.load_mask()


def _add_bench_args(parser):
    parser.add_argument("--data", required=True, help="dataset root (images/ + masks/)")
    parser.add_argument("--predictor", default="reference",
                        help="'reference' or 'external:<host:port>'")
    parser.add_argument("--gamma", type=float, default=1.4)
    parser.add_argument("--seed", type=int, default=17)
    parser.add_argument("--thresholds", default="0.85,0.90")
    parser.add_argument("--max-clicks", type=int, default=20, dest="max_clicks")


def cmd_bench(args) -> int:
    thresholds = tuple(float(t) for t in args.thresholds.split(","))
    predictor = predictor_from_spec(args.predictor)
    report = run_benchmark(_dataset_samples(args.data), predictor,
                           _session_config(args), thresholds, args.seed,
                           predictor_name=args.predictor)
    fmt = "csv" if args.out.endswith(".csv") else "json"
    emit_report(report, args.out, fmt)
    for t in thresholds:
        print(f"NoC@{int(t * 100)} = {report.noc[t]:.3f}   "
              f"NoF@{int(t * 100)} = {report.nof[t]}")
    print(f"mean SPC = {report.mean_spc_ms:.1f} ms over {report.n_records} records "
          f"({report.n_failed} failed); report -> {args.out}")
    return 0


def cmd_ablate(args) -> int:
    thresholds = tuple(float(t) for t in args.thresholds.split(","))
    n_values = [int(n) for n in args.n.split(",")]
    predictor = predictor_from_spec(args.predictor)
    base = SessionConfig(gamma_expand=args.gamma, max_clicks=args.max_clicks)
    reports = ablation_sweep(_dataset_samples(args.data), predictor, base,
                             n_values, thresholds, args.seed)
    print(format_ablation_table(reports))
    if args.out:
        from .benchmark import report_to_dict

        with open(args.out, "w") as f:
            json.dump([report_to_dict(r) for r in reports], f, indent=2)
        print(f"reports -> {args.out}")
    return 0


def cmd_simulate(args) -> int:
    from PIL import Image

    image = np.asarray(Image.open(args.image).convert("RGB"), np.float32) / 255.0
    gt = np.asarray(Image.open(args.gt).convert("L")) > 0
    if image.shape[:2] != gt.shape:
        sys.exit(f"image {image.shape[:2]} vs gt {gt.shape}")
    predictor = predictor_from_spec(args.predictor)
    steps = []

    def collect(entry, mask):
        lp = entry.local_patch
        steps.append({
            "y": entry.y, "x": entry.x, "positive": entry.positive,
            "iou": entry.iou, "dice": entry.dice, "phase": entry.phase,
            "local_patch": None if lp is None else
                {"y1": lp.y1, "y2": lp.y2, "x1": lp.x1, "x2": lp.x2},
            "mask": rle_encode(mask),
        })

    log = run_session(image, gt, predictor, _session_config(args), args.image,
                      on_step=collect)
    trace = {"image": args.image, "gt": args.gt, "status": log.status,
             "clicks": steps}
    with open(args.trace, "w") as f:
        json.dump(trace, f)
    print(f"{len(log.entries)} clicks, status {log.status}; trace -> {args.trace}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    addr = args.addr or os.environ.get("CLORE_ADDR", "127.0.0.1:8000")
    host, _, port = addr.rpartition(":")
    predictor = predictor_from_spec(
        args.predictor or os.environ.get("CLORE_PREDICTOR", "reference"))
    app = create_app(predictor, ui_dir=args.ui_dir)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="clore")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bench", help="run the NoC/NoF/mDice benchmark")
    _add_bench_args(p)
    p.add_argument("--n", type=int, default=5, help="refinement trigger")
    p.add_argument("--out", default="report.json")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("ablate", help="sweep the refinement trigger n")
    _add_bench_args(p)
    p.add_argument("--n", default="2,3,5,7,9", help="comma-separated triggers")
    p.add_argument("--out", default="")
    p.set_defaults(fn=cmd_ablate)

    p = sub.add_parser("simulate", help="trace one simulated session")
    p.add_argument("--image", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--trace", default="trace.json")
    p.add_argument("--predictor", default="reference")
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--gamma", type=float, default=1.4)
    p.add_argument("--max-clicks", type=int, default=20, dest="max_clicks")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("serve", help="start the annotation HTTP service")
    p.add_argument("--addr", default="")
    p.add_argument("--predictor", default="")
    p.add_argument("--ui-dir", default=None)
    p.set_defaults(fn=cmd_serve)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
