"""Embedding corpora: loading, validation, normalization, cosine similarity.

The on-disk format is line-delimited JSON, one record per line:

    {"id": "r0", "text": "...", "embedding": [0.1, ...], "label": "positive"}

``text`` and ``label`` are optional. Embeddings are stored as float32;
every dot product accumulates in float64.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

POSITIVE = "positive"
NEGATIVE = "negative"
LABELS = (POSITIVE, NEGATIVE)


class CorpusError(ValueError):
    """An embedding file or record violates the corpus contract."""


@dataclass(frozen=True)
class Record:
    """One embedded item; the unit everything downstream consumes."""

    id: str
    embedding: np.ndarray
    text: Optional[str] = None
    truth_label: Optional[str] = None
    source: str = "real"


class Corpus:
    """Ordered, immutable collection of records sharing one dimension.

    Iteration order is file order and is stable across reloads; ``id_index``
    maps each id to its position.
    """

    def __init__(self, records: Sequence[Record]):
        if not records:
            raise CorpusError("empty corpus")
        self.records: list[Record] = list(records)
        self.dimension = int(self.records[0].embedding.shape[0])
        self.id_index: dict[str, int] = {}
        for pos, rec in enumerate(self.records):
            if not rec.id:
                raise CorpusError(f"record at position {pos} has an empty id")
            if rec.id in self.id_index:
                raise CorpusError(f"duplicate id {rec.id!r}")
            if rec.embedding.ndim != 1 or rec.embedding.shape[0] != self.dimension:
                raise CorpusError(
                    f"record {rec.id!r} has dimension {rec.embedding.shape[0]}, "
                    f"expected {self.dimension}"
                )
            if not np.isfinite(rec.embedding).all():
                raise CorpusError(f"record {rec.id!r} has a non-finite embedding entry")
            self.id_index[rec.id] = pos

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[Record]:
        return iter(self.records)

    @cached_property
    def ids(self) -> list[str]:
        return [r.id for r in self.records]

    @cached_property
    def matrix(self) -> np.ndarray:
        """All embeddings stacked, float32, shape (n, dimension)."""
        return np.stack([r.embedding for r in self.records]).astype(np.float32)

    def record(self, record_id: str) -> Record:
        try:
            return self.records[self.id_index[record_id]]
        except KeyError:
            raise KeyError(f"unknown record id {record_id!r}") from None

    def subset(self, ids: Iterable[str]) -> "Corpus":
        return Corpus([self.record(i) for i in ids])

    def merge(self, other: "Corpus") -> "Corpus":
        """Concatenate two corpora; ids must stay disjoint."""
        return Corpus(self.records + other.records)

    def has_truth_labels(self) -> bool:
        return all(r.truth_label is not None for r in self.records)

    def positive_count(self) -> int:
        missing = [r.id for r in self.records if r.truth_label is None]
        if missing:
            raise CorpusError(
                f"truth labels required but missing for {len(missing)} records "
                f"(first: {missing[0]!r})"
            )
        return sum(1 for r in self.records if r.truth_label == POSITIVE)


def load_corpus(path: str | Path, source: str = "real") -> Corpus:
    """Parse a line-delimited JSON embedding file into a validated Corpus.

    The dimension is inferred from the first record; any later mismatch,
    duplicate id, malformed line, or non-finite value is reported with its
    1-based line number.
    """
    path = Path(path)
    records: list[Record] = []
    dimension: Optional[int] = None
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path.name}:{lineno}: malformed JSON ({exc.msg})") from None
            if not isinstance(obj, dict):
                raise CorpusError(f"{path.name}:{lineno}: expected a JSON object")
            rec_id = obj.get("id")
            if not isinstance(rec_id, str) or not rec_id:
                raise CorpusError(f"{path.name}:{lineno}: missing or empty id")
            raw = obj.get("embedding")
            if not isinstance(raw, list) or not raw:
                raise CorpusError(f"{path.name}:{lineno}: missing embedding")
            emb = np.asarray(raw, dtype=np.float32)
            if emb.ndim != 1:
                raise CorpusError(f"{path.name}:{lineno}: embedding must be a flat list")
            if dimension is None:
                dimension = int(emb.shape[0])
            elif emb.shape[0] != dimension:
                raise CorpusError(
                    f"{path.name}:{lineno}: embedding has dimension {emb.shape[0]}, "
                    f"expected {dimension}"
                )
            if not np.isfinite(emb).all():
                raise CorpusError(f"{path.name}:{lineno}: non-finite embedding value")
            label = obj.get("label")
            if label is not None and label not in LABELS:
                raise CorpusError(f"{path.name}:{lineno}: label must be one of {LABELS}")
            records.append(
                Record(
                    id=rec_id,
                    embedding=emb,
                    text=obj.get("text"),
                    truth_label=label,
                    source=source,
                )
            )
    if not records:
        raise CorpusError(f"{path.name}: empty corpus")
    return Corpus(records)


def dump_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus back to line-delimited JSON (reload-stable order)."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for rec in corpus.records:
            obj: dict = {"id": rec.id, "embedding": [float(x) for x in rec.embedding]}
            if rec.text is not None:
                obj["text"] = rec.text
            if rec.truth_label is not None:
                obj["label"] = rec.truth_label
            fh.write(json.dumps(obj) + "\n")


def normalize_unit(corpus: Corpus) -> Corpus:
    """Rescale every embedding to unit L2 norm, preserving ids and order."""
    out = []
    for rec in corpus.records:
        vec = rec.embedding.astype(np.float64)
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            raise CorpusError(f"zero-norm embedding for record {rec.id!r}")
        out.append(replace(rec, embedding=(vec / norm).astype(np.float32)))
    return Corpus(out)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity with float64 accumulation, clamped to [-1, 1].

    Symmetric by construction: the elementwise products do not depend on
    argument order, and the reduction is the same either way.
    """
    va = np.asarray(a, dtype=np.float64)
    vb = np.asarray(b, dtype=np.float64)
    if va.shape != vb.shape:
        raise CorpusError(f"dimension mismatch: {va.shape} vs {vb.shape}")
    na = float(np.dot(va, va)) ** 0.5
    nb = float(np.dot(vb, vb)) ** 0.5
    if na == 0.0 or nb == 0.0:
        raise CorpusError("cosine undefined for zero-norm vector")
    val = float(np.dot(va, vb)) / (na * nb)
    return min(1.0, max(-1.0, val))
