"""Simulated-annotation benchmark: NoC/NoF, mDice-vs-clicks curves, SPC.

Sessions run the deterministic corrective clicker against ground truth up to
a click budget; failed sessions contribute the full budget (clamped) to the
NoC mean, and every report header declares that clamp.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import raster
from .clicks import next_corrective_click
from .pipeline import ClickEngine, SessionConfig
from .predictor import Predictor, PredictorError
from .raster import Rect

DEFAULT_THRESHOLDS = (0.85, 0.90)


@dataclass
class ClickEntry:
    y: int
    x: int
    positive: bool
    iou: float
    dice: float
    phase: str
    local_patch: Optional[Rect]
    elapsed_ms: float


@dataclass
class InteractionLog:
    record_id: str
    entries: list[ClickEntry] = field(default_factory=list)
    status: str = "exhausted"     # reached-90 | reached-85 | exhausted | failed
    max_clicks: int = 20

    def first_reach(self, threshold: float) -> Optional[int]:
        """1-based click index where IoU first reached threshold, else None."""
        for i, e in enumerate(self.entries):
            if e.iou >= threshold:
                return i + 1
        return None

    def dice_at(self, k: int) -> float:
        if not self.entries:
            raise ValueError(f"log {self.record_id} has no entries")
        return self.entries[min(k, len(self.entries)) - 1].dice


@dataclass
class BenchmarkReport:
    config: dict
    noc: dict[float, float]
    nof: dict[float, int]
    mdice_curve: list[tuple[int, float]]
    mean_spc_ms: float
    total_time_s: float
    n_records: int
    n_failed: int


def run_session(image: np.ndarray, gt: np.ndarray, predictor: Predictor,
                cfg: SessionConfig, record_id: str = "",
                clicker: Callable = next_corrective_click,
                thresholds: Sequence[float] = DEFAULT_THRESHOLDS,
                on_step: Optional[Callable] = None) -> InteractionLog:
    """Annotate one sample with the corrective clicker until convergence,
    the top threshold, or the click budget.

    ``on_step(entry, mask)`` is called after every acknowledged click; the
    trace dumper uses it to capture per-click masks.
    """
    engine = ClickEngine(predictor, cfg)
    state = engine.new_session(image)
    log = InteractionLog(record_id, max_clicks=cfg.max_clicks)
    top = max(thresholds)
    for _ in range(cfg.max_clicks):
        click = clicker(state.cur_mask, gt)
        if click is None:
            break
        try:
            out = engine.add_click(state, click.y, click.x, click.positive)
        except PredictorError:
            log.status = "failed"
            return log
        score = raster.iou(out.mask, gt)
        entry = ClickEntry(click.y, click.x, click.positive, score,
                           raster.dice(out.mask, gt), out.phase,
                           out.local_patch, out.elapsed_ms)
        log.entries.append(entry)
        if on_step is not None:
            on_step(entry, out.mask)
        if score >= top:
            break
    if log.first_reach(0.90) is not None:
        log.status = "reached-90"
    elif log.first_reach(0.85) is not None:
        log.status = "reached-85"
    return log


def noc(logs: Sequence[InteractionLog], threshold: float) -> float:
    """Mean clicks to first reach the IoU threshold, failures clamped to the budget."""
    if not logs:
        raise ValueError("no logs")
    total = 0
    for log in logs:
        reach = log.first_reach(threshold)
        total += reach if reach is not None else log.max_clicks
    return total / len(logs)


def nof(logs: Sequence[InteractionLog], threshold: float) -> int:
    """Count of sessions that never reached the IoU threshold."""
    if not logs:
        raise ValueError("no logs")
    return sum(1 for log in logs if log.first_reach(threshold) is None)


def mdice_at(logs: Sequence[InteractionLog], k: int) -> float:
    """Mean Dice at click k (sessions that stopped earlier use their last entry)."""
    if not logs:
        raise ValueError("no logs")
    if k < 1:
        raise ValueError("k must be >= 1")
    return float(np.mean([log.dice_at(k) for log in logs]))


def run_benchmark(samples, predictor: Predictor, cfg: SessionConfig,
                  thresholds: Sequence[float] = DEFAULT_THRESHOLDS,
                  seed: int = 17, predictor_name: str = "reference",
                  curve_points: Optional[Sequence[int]] = None) -> BenchmarkReport:
    """Run every (id, image, gt) sample and aggregate a report.

    ``samples`` yields (record_id, image, gt) triples.  Failed sessions are
    skipped in the aggregates but counted.
    """
    logs = []
    failed = 0
    count = 0
    for record_id, image, gt in samples:
        count += 1
        log = run_session(image, gt, predictor, cfg, record_id,
                          thresholds=thresholds)
        if log.status == "failed":
            failed += 1
            continue
        logs.append(log)
    if not logs:
        raise ValueError("every session failed; nothing to aggregate")
    if curve_points is None:
        curve_points = range(1, cfg.max_clicks + 1)
    elapsed = [e.elapsed_ms for log in logs for e in log.entries]
    total_s = sum(elapsed) / 1000.0   # total time = summed per-click time
    return BenchmarkReport(
        config={
            "n_trigger": cfg.n_trigger,
            "gamma": cfg.gamma_expand,
            "seed": seed,
            "max_clicks": cfg.max_clicks,
            "thresholds": list(thresholds),
            "predictor": predictor_name,
            "noc_clamp": cfg.max_clicks,
        },
        noc={t: noc(logs, t) for t in thresholds},
        nof={t: nof(logs, t) for t in thresholds},
        mdice_curve=[(k, mdice_at(logs, k)) for k in curve_points],
        mean_spc_ms=float(np.mean(elapsed)) if elapsed else 0.0,
        total_time_s=total_s,
        n_records=count,
        n_failed=failed,
    )


def ablation_sweep(samples, predictor: Predictor, base_cfg: SessionConfig,
                   n_values: Sequence[int], thresholds=DEFAULT_THRESHOLDS,
                   seed: int = 17) -> list[BenchmarkReport]:
    """One full benchmark per refinement trigger value, identical seeds."""
    from dataclasses import replace

    samples = list(samples)
    reports = []
    for n in n_values:
        if n < 1:
            raise ValueError("trigger values must be >= 1")
        cfg = replace(base_cfg, n_trigger=n)
        reports.append(run_benchmark(samples, predictor, cfg, thresholds, seed))
    return reports


def format_ablation_table(reports: Sequence[BenchmarkReport]) -> str:
    lines = ["n_trigger | " + " | ".join(
        f"NoC@{int(t * 100)} | NoF@{int(t * 100)}"
        for t in reports[0].config["thresholds"])]
    for r in reports:
        cells = []
        for t in r.config["thresholds"]:
            cells.append(f"{r.noc[t]:7.3f}")
            cells.append(f"{r.nof[t]:6d}")
        lines.append(f"{r.config['n_trigger']:9d} | " + " | ".join(cells))
    return "\n".join(lines)


def _threshold_key(t: float) -> str:
    return repr(float(t))


def report_to_dict(report: BenchmarkReport, include_timing: bool = True) -> dict:
    out = {
        "config": dict(report.config),
        "noc": {_threshold_key(t): v for t, v in report.noc.items()},
        "nof": {_threshold_key(t): v for t, v in report.nof.items()},
        "mdice_curve": [[int(k), float(v)] for k, v in report.mdice_curve],
        "n_records": report.n_records,
        "n_failed": report.n_failed,
    }
    if include_timing:
        out["mean_spc_ms"] = report.mean_spc_ms
        out["total_time_s"] = report.total_time_s
    return out


def report_from_dict(data: dict) -> BenchmarkReport:
    return BenchmarkReport(
        config=dict(data["config"]),
        noc={float(k): float(v) for k, v in data["noc"].items()},
        nof={float(k): int(v) for k, v in data["nof"].items()},
        mdice_curve=[(int(k), float(v)) for k, v in data["mdice_curve"]],
        mean_spc_ms=float(data.get("mean_spc_ms", 0.0)),
        total_time_s=float(data.get("total_time_s", 0.0)),
        n_records=int(data["n_records"]),
        n_failed=int(data["n_failed"]),
    )


def report_json(report: BenchmarkReport, include_timing: bool = True) -> str:
    """Canonical JSON: sorted keys, fixed separators, so identical runs are
    byte-identical (timing is wall-clock, hence excludable)."""
    return json.dumps(report_to_dict(report, include_timing),
                      sort_keys=True, separators=(",", ":"))


_CSV_FIELDS = ["kind", "key", "noc", "nof", "mdice", "spc_ms"]


def report_csv(report: BenchmarkReport) -> str:
    """Flat CSV: one header, one row per threshold, one row per curve point."""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=_CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for t in report.config["thresholds"]:
        writer.writerow({"kind": "threshold", "key": _threshold_key(t),
                         "noc": repr(report.noc[t]), "nof": report.nof[t],
                         "mdice": "", "spc_ms": repr(report.mean_spc_ms)})
    for k, v in report.mdice_curve:
        writer.writerow({"kind": "curve", "key": k, "noc": "", "nof": "",
                         "mdice": repr(v), "spc_ms": ""})
    return buf.getvalue()


def emit_report(report: BenchmarkReport, path, fmt: str = "json",
                include_timing: bool = True) -> Path:
    path = Path(path)
    if fmt == "json":
        path.write_text(report_json(report, include_timing) + "\n")
    elif fmt == "csv":
        path.write_text(report_csv(report))
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return path


def load_report(path) -> BenchmarkReport:
    """Parse an emitted JSON report back into a BenchmarkReport."""
    return report_from_dict(json.loads(Path(path).read_text()))
