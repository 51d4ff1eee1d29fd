"""ADD-S pose error, success thresholds, and the benchmark aggregator."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .geometry import PointCloud, apply_transform

DEFAULT_THRESHOLDS = (0.10, 0.15, 0.20)


def adds_error(
    pose: np.ndarray, pose_gt: np.ndarray, cloud: PointCloud
) -> float:
    """Mean nearest-neighbor distance between the two transformed clouds.

    For every model point transformed by ``pose``, the distance to the
    closest point of the ground-truth-transformed cloud; directed, not
    symmetric. Matches the O(m^2) brute force within 1e-9.
    """
    est = apply_transform(pose, cloud.points)
    gt = apply_transform(pose_gt, cloud.points)
    dists, _ = cKDTree(gt).query(est, k=1)
    return float(np.mean(dists))


def success(adds: float, diameter: float, threshold_fraction: float) -> bool:
    """True when adds is strictly smaller than threshold_fraction * diameter."""
    if diameter <= 0:
        raise ValueError("diameter must be positive")
    if not 0.0 < threshold_fraction < 1.0:
        raise ValueError("threshold fraction must lie in (0, 1)")
    return adds < threshold_fraction * diameter


@dataclass(frozen=True)
class EvalRecord:
    """One evaluated scene: estimated vs ground-truth pose."""

    scene_id: str
    class_id: int
    pose: np.ndarray
    pose_gt: np.ndarray
    adds: float
    diameter: float

    def __post_init__(self):
        if self.adds < 0:
            raise ValueError("adds must be nonnegative")
        if self.diameter <= 0:
            raise ValueError("diameter must be positive")


@dataclass(frozen=True)
class ClassSummary:
    """Per-class aggregate: mean ADD-S +- stderr and success rates (%)."""

    class_id: int
    class_name: str
    count: int
    mean_adds: float
    stderr: float
    success_rates: dict[float, float]


def benchmark(
    records: list[EvalRecord],
    thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS,
    class_names: dict[int, str] | None = None,
) -> list[ClassSummary]:
    """Per-class success-rate table plus mean ADD-S and standard error.

    The spread statistic is the standard error of the mean
    (sample std with ddof=1 over sqrt(n); 0 for a single record).
    """
    if not records:
        raise ValueError("no records to aggregate")
    class_names = class_names or {}
    by_class: dict[int, list[EvalRecord]] = {}
    for rec in records:
        by_class.setdefault(rec.class_id, []).append(rec)

    summaries = []
    for class_id in sorted(by_class):
        rows = by_class[class_id]
        adds = np.array([r.adds for r in rows])
        n = len(rows)
        stderr = float(np.std(adds, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        rates = {
            t: 100.0 * sum(success(r.adds, r.diameter, t) for r in rows) / n
            for t in thresholds
        }
        summaries.append(
            ClassSummary(
                class_id=class_id,
                class_name=class_names.get(class_id, str(class_id)),
                count=n,
                mean_adds=float(adds.mean()),
                stderr=stderr,
                success_rates=rates,
            )
        )
    return summaries


def _threshold_label(t: float) -> str:
    return f"sr{round(100 * t)}"


def format_benchmark_table(
    summaries: list[ClassSummary],
    thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS,
) -> str:
    """Human-readable success-rate table, one row per class."""
    header = ["class", "n", "mean_adds", "stderr"] + [
        _threshold_label(t) for t in thresholds
    ]
    lines = ["  ".join(f"{h:>10}" for h in header)]
    for s in summaries:
        row = [
            f"{s.class_name:>10}",
            f"{s.count:>10}",
            f"{s.mean_adds:>10.4f}",
            f"{s.stderr:>10.4f}",
        ] + [f"{s.success_rates[t]:>10.1f}" for t in thresholds]
        lines.append("  ".join(row))
    return "\n".join(lines)


def write_results_file(
    path,
    records: list[EvalRecord],
    summaries: list[ClassSummary],
    thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS,
    class_names: dict[int, str] | None = None,
) -> None:
    """Structured results file: per-scene rows then a summary block.

    Column order is fixed so files diff cleanly.
    """
    class_names = class_names or {}
    ok_cols = [f"ok{round(100 * t)}" for t in thresholds]
    lines = ["shapepose_results 1"]
    lines.append(
        "columns scene class_id class_name adds diameter " + " ".join(ok_cols)
    )
    for rec in sorted(records, key=lambda r: r.scene_id):
        flags = " ".join(
            str(int(success(rec.adds, rec.diameter, t))) for t in thresholds
        )
        name = class_names.get(rec.class_id, str(rec.class_id))
        lines.append(
            f"scene {rec.scene_id} {rec.class_id} {name} "
            f"{rec.adds!r} {rec.diameter!r} {flags}"
        )
    sr_cols = [_threshold_label(t) for t in thresholds]
    lines.append(
        "summary_columns class_id class_name n mean_adds stderr "
        + " ".join(sr_cols)
    )
    for s in summaries:
        rates = " ".join(repr(s.success_rates[t]) for t in thresholds)
        lines.append(
            f"summary {s.class_id} {s.class_name} {s.count} "
            f"{s.mean_adds!r} {s.stderr!r} {rates}"
        )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
