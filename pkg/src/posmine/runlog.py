"""Per-run bookkeeping: queried batches, oracle labels, batch precision."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .data import POSITIVE


@dataclass
class IterationRecord:
    index: int                 # 1-based iteration number
    batch_ids: list[str]       # query order
    labels: dict[str, str]
    batch_precision: float


@dataclass
class RunLog:
    """Append-only record of one strategy run over the real pool.

    Batches stay pairwise disjoint and the labeled set only grows; both are
    enforced on append.
    """

    strategy: str
    seed_ids: list[str]
    pool_size: int
    iterations: list[IterationRecord] = field(default_factory=list)
    failure: Optional[str] = None
    extra: dict = field(default_factory=dict)
    _seen: set[str] = field(default_factory=set, repr=False)

    def append(self, record: IterationRecord) -> None:
        overlap = self._seen.intersection(record.batch_ids)
        if overlap:
            raise ValueError(f"batch re-queries already labeled ids: {sorted(overlap)[:5]}")
        if len(set(record.batch_ids)) != len(record.batch_ids):
            raise ValueError("batch contains duplicate ids")
        self.iterations.append(record)
        self._seen.update(record.batch_ids)

    def labeled_ids(self) -> list[str]:
        out: list[str] = []
        for rec in self.iterations:
            out.extend(rec.batch_ids)
        return out

    def labels(self) -> dict[str, str]:
        out: dict[str, str] = {}
        for rec in self.iterations:
            out.update(rec.labels)
        return out

    def positives(self) -> list[str]:
        return [i for rec in self.iterations for i in rec.batch_ids if rec.labels[i] == POSITIVE]


def batch_precision(batch_ids: list[str], labels: dict[str, str]) -> float:
    if not batch_ids:
        return 0.0
    return sum(1 for i in batch_ids if labels[i] == POSITIVE) / len(batch_ids)
