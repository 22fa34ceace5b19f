"""Deterministic clustered benchmark corpus for desk-scale evaluation.

Generates a unit-vector pool of Gaussian clusters around orthonormal
centers (so different classes never get close in cosine), with a 10%
positive rate, plus a synthetic seed pool imitating generated examples:
mostly valid points near two of the positive clusters, a smaller invalid
slice near negative clusters, and one positive cluster with no synthetic
counterpart at all, so expansion strategies differ in how much of the
positive class they can ever reach.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Corpus, NEGATIVE, POSITIVE, Record


@dataclass(frozen=True)
class BenchmarkSpec:
    dim: int = 64
    rng_seed: int = 7
    positive_sizes: tuple[int, ...] = (600, 250, 150)
    negative_sizes: tuple[int, ...] = (1500, 1500, 1500, 1500, 1500, 1500)
    noise: float = 0.35
    # synthetic pool: (positive cluster index, count) for valid points and
    # (negative cluster index, count) for invalid ones; the last positive
    # cluster is deliberately unrepresented
    synthetic_valid: tuple[tuple[int, int], ...] = ((0, 400), (1, 110))
    synthetic_invalid: tuple[tuple[int, int], ...] = ((0, 30), (1, 30), (2, 30))
    # tight blobs: strongly connected to their negative cluster, and compact
    # enough that coverage selection spends at most one pick per blob
    invalid_noise: float = 0.10

    @property
    def n_pool(self) -> int:
        return sum(self.positive_sizes) + sum(self.negative_sizes)


def _cluster_points(
    center: np.ndarray, count: int, noise: float, rng: np.random.Generator
) -> np.ndarray:
    dim = center.shape[0]
    pts = center[None, :] + noise * rng.standard_normal((count, dim)) / np.sqrt(dim)
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def make_benchmark(spec: BenchmarkSpec = BenchmarkSpec()) -> tuple[Corpus, Corpus]:
    """Returns (real pool, synthetic pool), both unit-normalized."""
    rng = np.random.default_rng(spec.rng_seed)
    n_clusters = len(spec.positive_sizes) + len(spec.negative_sizes)
    basis, _ = np.linalg.qr(rng.standard_normal((spec.dim, n_clusters)))
    pos_centers = [basis[:, i] for i in range(len(spec.positive_sizes))]
    neg_centers = [basis[:, len(spec.positive_sizes) + i] for i in range(len(spec.negative_sizes))]

    vectors: list[np.ndarray] = []
    labels: list[str] = []
    for center, count in zip(pos_centers, spec.positive_sizes):
        vectors.append(_cluster_points(center, count, spec.noise, rng))
        labels.extend([POSITIVE] * count)
    for center, count in zip(neg_centers, spec.negative_sizes):
        vectors.append(_cluster_points(center, count, spec.noise, rng))
        labels.extend([NEGATIVE] * count)
    stacked = np.vstack(vectors)
    order = rng.permutation(stacked.shape[0])
    pool_records = [
        Record(
            id=f"r{final_pos:05d}",
            embedding=stacked[src].astype(np.float32),
            truth_label=labels[src],
            source="real",
        )
        for final_pos, src in enumerate(order)
    ]

    synth_vectors: list[np.ndarray] = []
    synth_labels: list[str] = []
    for cluster_idx, count in spec.synthetic_valid:
        synth_vectors.append(_cluster_points(pos_centers[cluster_idx], count, spec.noise, rng))
        synth_labels.extend([POSITIVE] * count)
    for cluster_idx, count in spec.synthetic_invalid:
        synth_vectors.append(
            _cluster_points(neg_centers[cluster_idx], count, spec.invalid_noise, rng)
        )
        synth_labels.extend([NEGATIVE] * count)
    synth_stacked = np.vstack(synth_vectors)
    synth_order = rng.permutation(synth_stacked.shape[0])
    synth_records = [
        Record(
            id=f"s{final_pos:04d}",
            embedding=synth_stacked[src].astype(np.float32),
            truth_label=synth_labels[src],
            source="synthetic",
        )
        for final_pos, src in enumerate(synth_order)
    ]
    return Corpus(pool_records), Corpus(synth_records)


def max_cross_class_cosine(pool: Corpus, block: int = 2048) -> float:
    """Largest cosine between any positive and any negative pool point."""
    labels = np.array([r.truth_label == POSITIVE for r in pool.records])
    mat = pool.matrix.astype(np.float64)
    mat /= np.linalg.norm(mat, axis=1, keepdims=True)
    pos = mat[labels]
    neg = mat[~labels]
    best = -1.0
    for start in range(0, pos.shape[0], block):
        sims = pos[start:start + block] @ neg.T
        best = max(best, float(sims.max()))
    return best
