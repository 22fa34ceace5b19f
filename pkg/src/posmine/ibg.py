"""Iterative bipartite-graph expansion.

Each round rebuilds the thresholded, degree-capped bipartite graph from
the current known positives to the still-unlabeled pool, queries every
connected pool node, absorbs confirmed positives into the left side, and
removes everything queried from the pool. The loop has no randomness, so
a run is fully reproducible from its configuration.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .data import Corpus, CorpusError, POSITIVE, Record
from .graphs import LshIndex, build_bipartite
from .oracle import BatchItem, LabelBatch, OracleError
from .runlog import IterationRecord, RunLog, batch_precision


@dataclass(frozen=True)
class IbgConfig:
    tau: float = 0.8
    d_max: int = 32
    T: int = 10
    stop_on_empty_batch: bool = True

    def validate(self) -> None:
        if not 0.0 <= self.tau < 1.0:
            raise ValueError("tau must be in [0, 1)")
        if self.d_max < 1:
            raise ValueError("d_max must be >= 1")
        if self.T < 1:
            raise ValueError("T must be >= 1")


def run_ibg(
    pool: Corpus,
    seeds: Corpus,
    cfg: IbgConfig,
    oracle,
    index: Optional[LshIndex] = None,
) -> RunLog:
    """Run the expansion loop for up to cfg.T iterations.

    Seed ids must be disjoint from the pool; seeds never appear in batches
    and never count toward metrics. On oracle failure the loop aborts and
    the partial log is returned with ``failure`` set.
    """
    cfg.validate()
    overlap = set(seeds.ids) & set(pool.ids)
    if overlap:
        raise CorpusError(f"seed ids overlap the pool: {sorted(overlap)[:5]}")

    log = RunLog(strategy="ibg", seed_ids=list(seeds.ids), pool_size=len(pool))
    positives: list[Record] = list(seeds.records)
    labeled: set[str] = set()

    for t in range(1, cfg.T + 1):
        graph = build_bipartite(
            Corpus(positives), pool, cfg.tau, cfg.d_max,
            index=index, exclude_right=labeled,
        )
        batch_ids = sorted(pool.ids[pos] for pos in graph.connected_right_positions())
        if not batch_ids:
            if cfg.stop_on_empty_batch:
                break
            continue
        batch = LabelBatch(
            batch_id=f"ibg-{t:04d}",
            items=[BatchItem(i, pool.record(i).text) for i in batch_ids],
            iteration=t,
        )
        try:
            labels = oracle.label(batch)
        except OracleError as exc:
            log.failure = str(exc)
            break
        log.append(
            IterationRecord(
                index=t,
                batch_ids=batch_ids,
                labels=labels,
                batch_precision=batch_precision(batch_ids, labels),
            )
        )
        labeled.update(batch_ids)
        positives.extend(pool.record(i) for i in batch_ids if labels[i] == POSITIVE)
    return log
