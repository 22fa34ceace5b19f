"""Cumulative precision/recall/F1 over queried batches, plus report files.

Metrics are computed over the real pool only (synthetic seeds never
count), against ground-truth labels. Reports are byte-deterministic CSV
or JSON tables ready for plotting.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .data import Corpus, POSITIVE
from .runlog import RunLog

REPORT_COLUMNS = (
    "iteration",
    "queried_cum",
    "query_ratio",
    "precision_cum",
    "recall_cum",
    "f1_cum",
)


class MissingTruthLabelError(ValueError):
    pass


@dataclass(frozen=True)
class EvalPoint:
    iteration: int
    queried_cum: int
    query_ratio: float
    precision_cum: float
    recall_cum: float
    f1_cum: float


def f1_score(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def evaluate(run: RunLog, pool: Corpus) -> list[EvalPoint]:
    """Cumulative metrics after each iteration, judged against truth labels.

    Precision and recall use the ground truth of the queried ids (not the
    oracle's possibly-noisy answers), so a noisy run is scored honestly.
    """
    total_positives = pool.positive_count()
    points: list[EvalPoint] = []
    queried = 0
    true_positives = 0
    for rec in run.iterations:
        for item_id in rec.batch_ids:
            record = pool.record(item_id)
            if record.truth_label is None:
                raise MissingTruthLabelError(f"no truth label for queried id {item_id!r}")
            if record.truth_label == POSITIVE:
                true_positives += 1
        queried += len(rec.batch_ids)
        precision = true_positives / queried if queried else 0.0
        recall = true_positives / total_positives if total_positives else 0.0
        points.append(
            EvalPoint(
                iteration=rec.index,
                queried_cum=queried,
                query_ratio=queried / len(pool),
                precision_cum=precision,
                recall_cum=recall,
                f1_cum=f1_score(precision, recall),
            )
        )
    return points


def random_baseline_curve(
    base_rate: float, pool_size: int, ratios: Sequence[float]
) -> list[EvalPoint]:
    """Analytic expectation of uniform random querying.

    Precision equals the base positive rate at every ratio (by convention
    also at ratio zero) and recall equals the query ratio.
    """
    points = []
    for i, ratio in enumerate(ratios):
        recall = float(ratio)
        points.append(
            EvalPoint(
                iteration=i,
                queried_cum=int(round(ratio * pool_size)),
                query_ratio=float(ratio),
                precision_cum=base_rate,
                recall_cum=recall,
                f1_cum=f1_score(base_rate, recall),
            )
        )
    return points


def emit_report(points: Iterable[EvalPoint], path: str | Path, format: str = "csv") -> Path:
    """Write the points table; identical inputs produce identical bytes."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    points = list(points)
    if format == "csv":
        lines = [",".join(REPORT_COLUMNS)]
        for pt in points:
            row = asdict(pt)
            lines.append(",".join(repr(row[col]) if isinstance(row[col], float) else str(row[col])
                                  for col in REPORT_COLUMNS))
        path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    elif format == "json":
        payload = [{col: asdict(pt)[col] for col in REPORT_COLUMNS} for pt in points]
        path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8", newline="\n")
    else:
        raise ValueError(f"unknown report format {format!r}")
    return path


def recall_at_ratio(points: Sequence[EvalPoint], ratio: float) -> float:
    """Linear interpolation of the cumulative recall curve, anchored at
    (0, 0) and held flat past the last point."""
    import numpy as np

    xs = [0.0] + [pt.query_ratio for pt in points]
    ys = [0.0] + [pt.recall_cum for pt in points]
    return float(np.interp(ratio, xs, ys))


def precision_at_recall(points: Sequence[EvalPoint], recall: float) -> float:
    """Precision at the first point reaching the given recall (step lookup)."""
    for pt in points:
        if pt.recall_cum >= recall - 1e-12:
            return pt.precision_cum
    return points[-1].precision_cum if points else 0.0
