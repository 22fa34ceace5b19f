"""Clamped label propagation on the global similarity graph.

Scores spread by repeated multiplication with the row-normalized adjacency
while labeled nodes stay clamped at +1/-1 (positive/negative); unlabeled
nodes start at 0. Each round the top-K unlabeled real nodes by score are
queried, their labels become new clamps, and K adapts to the previous
batch precision so every round lands roughly K0 new positives.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .data import Corpus, CorpusError, POSITIVE
from .graphs import LshIndex, NormalizedAdjacency, build_similarity_graph, row_normalize
from .oracle import BatchItem, LabelBatch, OracleError
from .runlog import IterationRecord, RunLog, batch_precision

# Guards float dust in K0/p_prev: values within 1e-9 of an integer are that
# integer as far as ceil is concerned.
_CEIL_EPS = 1e-9


@dataclass(frozen=True)
class LpRunConfig:
    k0: int = 100
    rounds: int = 10
    t_prop: int = 50
    eps: float = 1e-6
    k_max: Optional[int] = None      # defaults to 10 * k0
    tau: float = 0.8
    knn_cap: Optional[int] = None

    def resolved_k_max(self) -> int:
        k_max = self.k_max if self.k_max is not None else 10 * self.k0
        if k_max < self.k0:
            raise ValueError("k_max must be >= k0")
        return k_max

    def validate(self) -> None:
        if self.k0 < 1:
            raise ValueError("k0 must be >= 1")
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if self.t_prop < 1:
            raise ValueError("t_prop must be >= 1")
        self.resolved_k_max()


@dataclass
class LpState:
    """Propagation state between rounds: clamp values in y0 (positive +1,
    negative -1, unlabeled 0), the positions they pin, the fixed
    row-normalized adjacency, and the round counter."""

    y0: np.ndarray
    clamped: list[int]
    W: NormalizedAdjacency
    round_index: int = 0

    def clamp(self, pos: int, value: float) -> None:
        self.y0[pos] = value
        self.clamped.append(pos)

    def scores(self, t_prop: int, eps: float) -> np.ndarray:
        return propagate(self.W, self.y0, np.asarray(self.clamped), t_prop, eps)


def propagate(
    W: NormalizedAdjacency,
    y0: np.ndarray,
    clamped: np.ndarray,
    t_prop: int = 50,
    eps: float = 1e-6,
) -> np.ndarray:
    """Iterate y <- W y with re-clamping, up to t_prop steps.

    Stops early once max |delta y| < eps. Zero-degree nodes keep their
    current score (their W row is all zeros and would otherwise erase it).
    """
    y = np.asarray(y0, dtype=np.float64).copy()
    clamp_mask = np.zeros(y.shape[0], dtype=bool)
    clamp_mask[clamped] = True
    clamp_values = y[clamp_mask].copy()
    isolated = W.degrees == 0
    for _ in range(t_prop):
        y_next = W.matrix @ y
        y_next[isolated] = y[isolated]
        y_next[clamp_mask] = clamp_values
        delta = float(np.max(np.abs(y_next - y))) if y.size else 0.0
        y = y_next
        if delta < eps:
            break
    return y


def adaptive_k(k0: int, p_prev: float, k_max: int) -> int:
    """ceil(k0 / p_prev), clipped into [k0, k_max]; p_prev = 0 hits the cap."""
    if k0 < 1:
        raise ValueError("k0 must be >= 1")
    if k_max < k0:
        raise ValueError("k_max must be >= k0")
    if not 0.0 <= p_prev <= 1.0:
        raise ValueError("p_prev must be in [0, 1]")
    denom = max(p_prev, k0 / k_max)
    k = math.ceil(k0 / denom - _CEIL_EPS)
    return int(min(max(k, k0), k_max))


def select_top_k(
    scores: np.ndarray,
    node_ids: list[str],
    k: int,
    exclude: set[str],
) -> list[str]:
    """The k highest-scoring eligible ids, ties broken by id ascending."""
    if k < 1:
        raise ValueError("k must be >= 1")
    candidates = [
        (-float(scores[pos]), node_id)
        for pos, node_id in enumerate(node_ids)
        if node_id not in exclude
    ]
    candidates.sort()
    return [node_id for _, node_id in candidates[:k]]


def run_lp(
    pool: Corpus,
    seeds: Corpus,
    cfg: LpRunConfig,
    oracle,
    index: Optional[LshIndex] = None,
) -> RunLog:
    """Iterative label propagation with adaptive top-K candidate selection.

    The similarity graph over pool + seeds is built once. Seeds are clamped
    to +1 from the start; every oracle answer adds a +1/-1 clamp. Synthetic
    seed nodes are never candidates and never count toward metrics.
    """
    cfg.validate()
    overlap = set(seeds.ids) & set(pool.ids)
    if overlap:
        raise CorpusError(f"seed ids overlap the pool: {sorted(overlap)[:5]}")
    k_max = cfg.resolved_k_max()

    combined = pool.merge(seeds)
    graph = build_similarity_graph(combined, cfg.tau, knn_cap=cfg.knn_cap, index=index)
    W = row_normalize(graph)

    n_pool = len(pool)
    seed_positions = np.arange(n_pool, n_pool + len(seeds))
    if all(len(graph.adjacency[pos]) == 0 for pos in seed_positions):
        warnings.warn(
            "every seed is isolated at this tau; selection degrades to id order",
            stacklevel=2,
        )

    y0 = np.zeros(len(combined), dtype=np.float64)
    y0[seed_positions] = 1.0
    state = LpState(y0=y0, clamped=list(seed_positions), W=W)
    labeled: set[str] = set()
    exclude = set(seeds.ids)

    log = RunLog(strategy="lp", seed_ids=list(seeds.ids), pool_size=n_pool)
    p_prev = 1.0
    for r in range(1, cfg.rounds + 1):
        state.round_index = r
        scores = state.scores(cfg.t_prop, cfg.eps)
        k = adaptive_k(cfg.k0, p_prev, k_max)
        batch_ids = select_top_k(scores[:n_pool], pool.ids, k, exclude | labeled)
        if not batch_ids:
            break
        batch = LabelBatch(
            batch_id=f"lp-{r:04d}",
            items=[BatchItem(i, pool.record(i).text) for i in batch_ids],
            iteration=r,
        )
        try:
            labels = oracle.label(batch)
        except OracleError as exc:
            log.failure = str(exc)
            break
        log.append(
            IterationRecord(
                index=r,
                batch_ids=batch_ids,
                labels=labels,
                batch_precision=batch_precision(batch_ids, labels),
            )
        )
        labeled.update(batch_ids)
        for item_id, label in labels.items():
            state.clamp(combined.id_index[item_id], 1.0 if label == POSITIVE else -1.0)
        p_prev = log.iterations[-1].batch_precision
    return log
