"""Run the simulated-annotator benchmark and sweep the refinement trigger.

A small seed-fixed synthetic suite is annotated to convergence by the
corrective oracle; the report carries NoC/NoF at both thresholds, the
mDice-versus-clicks curve, and per-click latency.  The sweep re-runs the
same suite for several trigger values.
"""

from pathlib import Path

from clore.benchmark import (ablation_sweep, emit_report,
                             format_ablation_table, run_benchmark)
from clore.pipeline import SessionConfig
from clore.predictor import ReferenceClickPredictor
from clore.synthetic import make_suite

OUT = Path(__file__).parent / "output"


def main():
    suite = make_suite(40, size=192, seed=11)
    samples = [(f"s{i:03d}", img, mask) for i, (img, mask) in enumerate(suite)]
    predictor = ReferenceClickPredictor()

    report = run_benchmark(samples, predictor, SessionConfig(), seed=11)
    print("benchmark on 40 synthetic samples (trigger n = 5):")
    for t in (0.85, 0.90):
        print(f"  NoC@{int(t * 100)} = {report.noc[t]:.3f}   "
              f"NoF@{int(t * 100)} = {report.nof[t]}")
    print(f"  mean SPC = {report.mean_spc_ms:.1f} ms, "
          f"total {report.total_time_s:.1f} s")
    print("  mDice curve (first 8 clicks):",
          " ".join(f"{v:.3f}" for _, v in report.mdice_curve[:8]))

    OUT.mkdir(exist_ok=True)
    emit_report(report, OUT / "benchmark.json", "json")
    emit_report(report, OUT / "benchmark.csv", "csv")
    print(f"  wrote {OUT / 'benchmark.json'} and .csv")

    print("\ntrigger ablation over the same suite:")
    reports = ablation_sweep(samples, predictor, SessionConfig(), [2, 3, 5, 7],
                             seed=11)
    print(format_ablation_table(reports))

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        return
    fig, ax = plt.subplots(figsize=(6, 4))
    for r in reports:
        ks = [k for k, _ in r.mdice_curve[:10]]
        vs = [v for _, v in r.mdice_curve[:10]]
        ax.plot(ks, vs, marker="o", markersize=3,
                label=f"trigger n = {r.config['n_trigger']}")
    ax.set_xlabel("clicks")
    ax.set_ylabel("mean Dice")
    ax.legend()
    fig.tight_layout()
    fig.savefig(OUT / "mdice_curves.png", dpi=120)
    print(f"saved curves -> {OUT / 'mdice_curves.png'}")


if __name__ == "__main__":
    main()
