"""Labeling authorities and the append-only run ledger.

Simulation runs use the ground-truth oracle (or its label-flipping noisy
variant); live runs use a queue the HTTP service exposes to human raters.
Every answered batch is appended to a line-delimited ledger so interrupted
runs can resume and metrics can be replayed.
"""
from __future__ import annotations

import hashlib
import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Protocol

from .data import Corpus, LABELS, NEGATIVE, POSITIVE
from .runlog import IterationRecord, RunLog, batch_precision


class OracleError(RuntimeError):
    """The oracle could not answer a batch."""


class LedgerConflictError(RuntimeError):
    """A label contradicts one already recorded for the same id."""


@dataclass
class BatchItem:
    id: str
    text: Optional[str] = None


@dataclass
class LabelBatch:
    batch_id: str
    items: list[BatchItem]
    iteration: int = 0
    created_at: float = field(default_factory=time.time)
    status: str = "pending"  # pending -> answered

    def item_ids(self) -> list[str]:
        return [item.id for item in self.items]


class Oracle(Protocol):
    name: str

    def label(self, batch: LabelBatch) -> dict[str, str]: ...


class TruthOracle:
    """Answers with stored ground-truth labels; idempotent."""

    name = "truth"

    def __init__(self, corpus: Corpus):
        self.corpus = corpus

    def label(self, batch: LabelBatch) -> dict[str, str]:
        out: dict[str, str] = {}
        for item in batch.items:
            if item.id not in self.corpus.id_index:
                raise OracleError(f"unknown id {item.id!r}")
            label = self.corpus.record(item.id).truth_label
            if label is None:
                raise OracleError(f"no truth label for id {item.id!r}")
            out[item.id] = label
        batch.status = "answered"
        return out


def _unit_uniform(seed: int, item_id: str) -> float:
    # Stable per-id stream: independent of call order, batch composition,
    # and process (unlike the builtin salted str hash).
    digest = hashlib.sha256(f"{seed}:{item_id}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") / 2.0**64


class NoisyOracle:
    """Truth oracle with each label independently flipped with probability
    flip_prob; a given (rng_seed, id) pair always flips the same way."""

    name = "noisy"

    def __init__(self, corpus: Corpus, flip_prob: float, rng_seed: int = 0):
        if not 0.0 <= flip_prob < 0.5:
            raise ValueError("flip_prob must be in [0, 0.5)")
        self.flip_prob = flip_prob
        self.rng_seed = rng_seed
        self._truth = TruthOracle(corpus)

    def label(self, batch: LabelBatch) -> dict[str, str]:
        out = self._truth.label(batch)
        for item_id, label in out.items():
            if _unit_uniform(self.rng_seed, item_id) < self.flip_prob:
                out[item_id] = NEGATIVE if label == POSITIVE else POSITIVE
        return out


class HumanQueue:
    """One in-flight batch, answered all-or-nothing by external raters.

    Safe for one enqueuing worker and many polling/submitting clients.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._pending: Optional[LabelBatch] = None
        self._answers: dict[str, dict[str, str]] = {}
        self._events: dict[str, threading.Event] = {}

    def enqueue(self, batch: LabelBatch) -> None:
        with self._lock:
            if self._pending is not None:
                raise RuntimeError("a batch is already pending")
            self._pending = batch
            self._events[batch.batch_id] = threading.Event()

    def pending(self) -> Optional[LabelBatch]:
        with self._lock:
            return self._pending

    def submit(self, batch_id: str, labels: dict[str, str]) -> None:
        """Record a complete submission; partial or stray ids are rejected."""
        with self._lock:
            batch = self._pending
            if batch is None or batch.batch_id != batch_id:
                raise KeyError(f"unknown or stale batch id {batch_id!r}")
            wanted = set(batch.item_ids())
            missing = sorted(wanted - labels.keys())
            if missing:
                raise PartialSubmissionError(missing)
            unknown = sorted(labels.keys() - wanted)
            if unknown:
                raise UnknownItemsError(unknown)
            bad = sorted(i for i, lab in labels.items() if lab not in LABELS)
            if bad:
                raise ValueError(f"invalid labels for ids {bad[:5]}")
            self._answers[batch_id] = {i: labels[i] for i in batch.item_ids()}
            batch.status = "answered"
            self._pending = None
            self._events[batch_id].set()

    def poll(self, batch_id: str) -> Optional[dict[str, str]]:
        with self._lock:
            if batch_id in self._answers:
                return dict(self._answers[batch_id])
            if self._pending is not None and self._pending.batch_id == batch_id:
                return None
            raise KeyError(f"unknown batch id {batch_id!r}")

    def wait(self, batch_id: str, timeout: Optional[float] = None) -> dict[str, str]:
        event = self._events.get(batch_id)
        if event is None:
            raise KeyError(f"unknown batch id {batch_id!r}")
        if not event.wait(timeout):
            raise OracleError(f"timed out waiting for batch {batch_id!r}")
        return dict(self._answers[batch_id])


class PartialSubmissionError(ValueError):
    def __init__(self, missing_ids: list[str]):
        self.missing_ids = missing_ids
        super().__init__(f"submission incomplete, missing ids: {missing_ids[:10]}")


class UnknownItemsError(ValueError):
    def __init__(self, unknown_ids: list[str]):
        self.unknown_ids = unknown_ids
        super().__init__(f"submission contains ids outside the batch: {unknown_ids[:10]}")


class QueueOracle:
    """Blocks the run worker on the human queue until a batch is answered."""

    name = "human"

    def __init__(self, queue: HumanQueue, timeout: Optional[float] = None,
                 on_enqueue=None, on_answered=None):
        self.queue = queue
        self.timeout = timeout
        self.on_enqueue = on_enqueue
        self.on_answered = on_answered

    def label(self, batch: LabelBatch) -> dict[str, str]:
        self.queue.enqueue(batch)
        if self.on_enqueue:
            self.on_enqueue(batch)
        answers = self.queue.wait(batch.batch_id, self.timeout)
        if self.on_answered:
            self.on_answered(batch)
        return answers


class RunLedger:
    """Append-only JSONL label ledger, one row per labeled id.

    Row: {"run": ..., "iter": n, "id": ..., "label": ..., "source": ...}.
    Loading an existing file primes the known-label map, which rejects
    contradictions and lets a rerun replay past answers.
    """

    def __init__(self, path: str | Path, run_name: str = "run"):
        self.path = Path(path)
        self.run_name = run_name
        self.known: dict[str, str] = {}
        self.rows: list[dict] = []
        if self.path.exists():
            with self.path.open("r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    row = json.loads(line)
                    self._absorb(row)

    def _absorb(self, row: dict) -> None:
        item_id, label = row["id"], row["label"]
        if self.known.get(item_id, label) != label:
            raise LedgerConflictError(
                f"id {item_id!r} already labeled {self.known[item_id]!r}, got {label!r}"
            )
        self.known[item_id] = label
        self.rows.append(row)

    def record_batch(self, iteration: int, labels: dict[str, str], source: str) -> None:
        new_rows = []
        for item_id, label in labels.items():
            if item_id in self.known:
                if self.known[item_id] != label:
                    raise LedgerConflictError(
                        f"id {item_id!r} already labeled {self.known[item_id]!r}, got {label!r}"
                    )
                continue
            new_rows.append(
                {"run": self.run_name, "iter": iteration, "id": item_id,
                 "label": label, "source": source}
            )
        if not new_rows:
            return
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("a", encoding="utf-8", newline="\n") as fh:
            for row in new_rows:
                fh.write(json.dumps(row) + "\n")
        for row in new_rows:
            self._absorb(row)


class LedgeredOracle:
    """Decorates an oracle with ledger persistence and replay.

    Ids already in the ledger are answered from it without consulting the
    inner oracle, so a restarted deterministic run re-traverses its past
    batches for free and only queries for genuinely new ids.
    """

    def __init__(self, inner, ledger: RunLedger):
        self.inner = inner
        self.ledger = ledger
        self.name = inner.name

    def label(self, batch: LabelBatch) -> dict[str, str]:
        known = {i.id: self.ledger.known[i.id] for i in batch.items if i.id in self.ledger.known}
        missing = [i for i in batch.items if i.id not in known]
        fresh: dict[str, str] = {}
        if missing:
            sub = LabelBatch(batch_id=batch.batch_id, items=missing, iteration=batch.iteration)
            fresh = self.inner.label(sub)
        self.ledger.record_batch(batch.iteration, fresh, self.inner.name)
        batch.status = "answered"
        return {**known, **fresh}


def run_log_from_ledger(path: str | Path, strategy: str = "", pool_size: int = 0,
                        seed_ids: Optional[list[str]] = None) -> RunLog:
    """Rebuild a RunLog by replaying a ledger file, grouping rows by iteration."""
    ledger = RunLedger(path)
    by_iter: dict[int, list[dict]] = {}
    for row in ledger.rows:
        by_iter.setdefault(int(row["iter"]), []).append(row)
    log = RunLog(strategy=strategy, seed_ids=seed_ids or [], pool_size=pool_size)
    for iteration in sorted(by_iter):
        rows = by_iter[iteration]
        batch_ids = [r["id"] for r in rows]
        labels = {r["id"]: r["label"] for r in rows}
        log.append(
            IterationRecord(
                index=iteration,
                batch_ids=batch_ids,
                labels=labels,
                batch_precision=batch_precision(batch_ids, labels),
            )
        )
    return log
