"""Similarity structures consumed by the expansion strategies.

Builds thresholded bipartite graphs with per-node degree caps, global
similarity graphs (optionally k-NN capped), row-normalized adjacency
matrices, and a signed-random-hyperplane LSH index for candidate
generation. Every edge list is sorted by similarity descending with ties
broken by neighbor id ascending, so builds are deterministic; edges found
through the LSH index are always re-verified with exact cosines, which
keeps the LSH edge set a subset of the exact one.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import sparse

from .data import Corpus, CorpusError

# Above this pool size, exact all-pairs similarity is no longer the default.
EXACT_PAIRWISE_LIMIT = 20_000
DEFAULT_LSH_TABLES = 16
DEFAULT_LSH_BITS = 12

_BLOCK_ROWS = 2048


def _unit_rows(matrix: np.ndarray, ids: Sequence[str]) -> np.ndarray:
    """Float64 copy with unit rows; zero-norm rows are contract violations."""
    m = matrix.astype(np.float64)
    norms = np.linalg.norm(m, axis=1)
    bad = np.nonzero(norms == 0.0)[0]
    if bad.size:
        raise CorpusError(f"zero-norm embedding for record {ids[int(bad[0])]!r}")
    return m / norms[:, None]


@dataclass
class BipartiteGraph:
    """Thresholded bipartite graph from known positives to the pool.

    ``edges[i]`` lists (right position, similarity) for left node i, sorted
    by similarity descending then right id ascending, truncated to d_max.
    """

    left_ids: list[str]
    right_ids: list[str]
    edges: list[list[tuple[int, float]]]
    tau: float
    d_max: int

    def connected_right_positions(self) -> list[int]:
        seen: set[int] = set()
        for lst in self.edges:
            seen.update(pos for pos, _ in lst)
        return sorted(seen)

    def degree(self, left_pos: int) -> int:
        return len(self.edges[left_pos])


@dataclass
class SimilarityGraph:
    """Symmetric thresholded similarity graph over one corpus."""

    node_ids: list[str]
    adjacency: list[list[tuple[int, float]]]
    tau: float
    symmetric: bool = True

    def degree(self, pos: int) -> int:
        return len(self.adjacency[pos])


@dataclass
class NormalizedAdjacency:
    """Row-normalized adjacency W with W_ij = 1/deg(i) on edges.

    Isolated nodes get all-zero rows; every other row sums to 1.
    """

    matrix: sparse.csr_matrix
    degrees: np.ndarray
    node_ids: list[str]


@dataclass
class LshIndex:
    """Signed-random-hyperplane LSH over a fixed corpus.

    Bit t of a signature is 1 iff the projection onto hyperplane t is
    nonnegative; signatures are grouped into one bucket map per table.
    Rebuilding with the same seed reproduces the buckets exactly.
    """

    n_tables: int
    n_bits: int
    rng_seed: int
    dimension: int
    hyperplanes: np.ndarray                      # (L, b, dim)
    tables: list[dict[int, np.ndarray]] = field(repr=False)
    node_signatures: np.ndarray = field(repr=False)  # (n, L) uint64

    def __len__(self) -> int:
        return self.node_signatures.shape[0]

    def signatures(self, vectors: np.ndarray) -> np.ndarray:
        """Signatures for arbitrary vectors, shape (n, L) uint64."""
        vec = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
        powers = (np.uint64(1) << np.arange(self.n_bits, dtype=np.uint64))
        out = np.empty((vec.shape[0], self.n_tables), dtype=np.uint64)
        for t in range(self.n_tables):
            bits = (vec @ self.hyperplanes[t].T) >= 0.0
            out[:, t] = bits.astype(np.uint64) @ powers
        return out

    def candidates(self, vector: np.ndarray) -> np.ndarray:
        """Union of bucket members matching the query vector, any table."""
        sigs = self.signatures(vector)[0]
        found: list[np.ndarray] = []
        for t in range(self.n_tables):
            bucket = self.tables[t].get(int(sigs[t]))
            if bucket is not None:
                found.append(bucket)
        if not found:
            return np.empty(0, dtype=np.int64)
        return np.unique(np.concatenate(found))

    def candidates_for_position(self, pos: int) -> np.ndarray:
        """Union of buckets containing an indexed node (itself included)."""
        found = []
        for t in range(self.n_tables):
            found.append(self.tables[t][int(self.node_signatures[pos, t])])
        return np.unique(np.concatenate(found))


def build_lsh_index(
    corpus: Corpus,
    n_tables: int = DEFAULT_LSH_TABLES,
    n_bits: int = DEFAULT_LSH_BITS,
    rng_seed: int = 7,
) -> LshIndex:
    if n_tables < 1:
        raise ValueError("n_tables must be >= 1")
    if not 1 <= n_bits <= 64:
        raise ValueError("n_bits must be in [1, 64]")
    rng = np.random.default_rng(rng_seed)
    hyperplanes = rng.standard_normal((n_tables, n_bits, corpus.dimension))
    index = LshIndex(
        n_tables=n_tables,
        n_bits=n_bits,
        rng_seed=rng_seed,
        dimension=corpus.dimension,
        hyperplanes=hyperplanes,
        tables=[],
        node_signatures=np.empty((0, n_tables), dtype=np.uint64),
    )
    sigs = index.signatures(corpus.matrix)
    tables: list[dict[int, np.ndarray]] = []
    for t in range(n_tables):
        buckets: dict[int, list[int]] = {}
        for pos, sig in enumerate(sigs[:, t]):
            buckets.setdefault(int(sig), []).append(pos)
        tables.append({sig: np.asarray(members, dtype=np.int64) for sig, members in buckets.items()})
    index.tables = tables
    index.node_signatures = sigs
    return index


def _top_edges(
    sims: np.ndarray,
    candidate_positions: np.ndarray,
    ids: Sequence[str],
    tau: float,
    cap: Optional[int],
) -> list[tuple[int, float]]:
    """Positions with sim > tau, sorted by (-sim, id), truncated to cap."""
    keep = sims > tau
    if not keep.any():
        return []
    cand = candidate_positions[keep]
    vals = sims[keep]
    picked = sorted(zip(cand, vals), key=lambda t: (-t[1], ids[int(t[0])]))
    if cap is not None:
        picked = picked[:cap]
    return [(int(pos), float(val)) for pos, val in picked]


def build_bipartite(
    seeds: Corpus,
    pool: Corpus,
    tau: float,
    d_max: int,
    index: Optional[LshIndex] = None,
    exclude_right: Optional[Iterable[str]] = None,
) -> BipartiteGraph:
    """Connect each seed to its pool neighbors above tau, keeping the top d_max.

    With an LSH index (built over ``pool``), candidate neighbors come from
    bucket lookups and are then verified with exact cosines, so retained
    edges are always a subset of the exact-mode edges. ``exclude_right``
    masks pool ids (used by the iterative loop to drop already-labeled
    nodes without rebuilding the index).
    """
    if seeds.dimension != pool.dimension:
        raise CorpusError(
            f"dimension mismatch: seeds {seeds.dimension} vs pool {pool.dimension}"
        )
    if not 0.0 <= tau < 1.0:
        raise ValueError("tau must be in [0, 1)")
    if d_max < 1:
        raise ValueError("d_max must be >= 1")
    excluded = np.zeros(len(pool), dtype=bool)
    if exclude_right:
        for rid in exclude_right:
            pos = pool.id_index.get(rid)
            if pos is not None:
                excluded[pos] = True

    left = _unit_rows(seeds.matrix, seeds.ids)
    right = _unit_rows(pool.matrix, pool.ids)
    edges: list[list[tuple[int, float]]] = []
    if index is None:
        cand = np.nonzero(~excluded)[0]
        for row in left @ right.T:
            row = np.clip(row, -1.0, 1.0)
            edges.append(_top_edges(row[cand], cand, pool.ids, tau, d_max))
    else:
        for svec in left:
            cand = index.candidates(svec)
            if cand.size:
                cand = cand[~excluded[cand]]
            if cand.size == 0:
                edges.append([])
                continue
            sims = np.clip(right[cand] @ svec, -1.0, 1.0)
            edges.append(_top_edges(sims, cand, pool.ids, tau, d_max))
    return BipartiteGraph(
        left_ids=list(seeds.ids),
        right_ids=list(pool.ids),
        edges=edges,
        tau=tau,
        d_max=d_max,
    )


def build_similarity_graph(
    corpus: Corpus,
    tau: float,
    knn_cap: Optional[int] = None,
    index: Optional[LshIndex] = None,
) -> SimilarityGraph:
    """Symmetric graph over one corpus: edges where cosine > tau.

    With ``knn_cap``, each node first keeps its top-cap neighbors and the
    union is then symmetrized (mutual re-insertion), so capped nodes can
    end up with degree above the cap.
    """
    if not 0.0 <= tau < 1.0:
        raise ValueError("tau must be in [0, 1)")
    if knn_cap is not None and knn_cap < 1:
        raise ValueError("knn_cap must be >= 1")
    n = len(corpus)
    ids = corpus.ids
    unit = _unit_rows(corpus.matrix, ids)

    directed: list[list[tuple[int, float]]] = []
    if index is None:
        for start in range(0, n, _BLOCK_ROWS):
            stop = min(start + _BLOCK_ROWS, n)
            sims = unit[start:stop] @ unit.T
            np.clip(sims, -1.0, 1.0, out=sims)
            for offset in range(stop - start):
                row = sims[offset]
                row[start + offset] = -2.0  # no self-loops
                cand = np.nonzero(row > tau)[0]
                directed.append(_top_edges(row[cand], cand, ids, tau, knn_cap))
    else:
        for i in range(n):
            cand = index.candidates_for_position(i)
            cand = cand[cand != i]
            if cand.size == 0:
                directed.append([])
                continue
            sims = np.clip(unit[cand] @ unit[i], -1.0, 1.0)
            directed.append(_top_edges(sims, cand, ids, tau, knn_cap))

    # Union symmetrization: every retained directed edge gains its reverse.
    merged: list[dict[int, float]] = [dict(lst) for lst in directed]
    for i, lst in enumerate(directed):
        for j, sim in lst:
            merged[j].setdefault(i, sim)
    adjacency = [
        sorted(
            ((j, sim) for j, sim in row.items()),
            key=lambda t: (-t[1], ids[t[0]]),
        )
        for row in merged
    ]
    return SimilarityGraph(node_ids=list(ids), adjacency=adjacency, tau=tau, symmetric=True)


def row_normalize(graph: SimilarityGraph) -> NormalizedAdjacency:
    """W with W_ij = 1/deg(i) on edges, zero rows for isolated nodes."""
    n = len(graph.node_ids)
    degrees = np.array([len(lst) for lst in graph.adjacency], dtype=np.int64)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(degrees, out=indptr[1:])
    indices = np.empty(int(indptr[-1]), dtype=np.int64)
    values = np.empty(int(indptr[-1]), dtype=np.float64)
    for i, lst in enumerate(graph.adjacency):
        if not lst:
            continue
        cols = np.fromiter((j for j, _ in lst), dtype=np.int64, count=len(lst))
        indices[indptr[i]:indptr[i + 1]] = cols
        values[indptr[i]:indptr[i + 1]] = 1.0 / degrees[i]
    matrix = sparse.csr_matrix((values, indices, indptr), shape=(n, n))
    return NormalizedAdjacency(matrix=matrix, degrees=degrees, node_ids=list(graph.node_ids))


def dump_graph_lines(graph: BipartiteGraph | SimilarityGraph) -> list[str]:
    """Line-delimited debug dump: {"id": ..., "nbrs": [[id, sim], ...]}."""
    import json

    lines = []
    if isinstance(graph, BipartiteGraph):
        for lid, lst in zip(graph.left_ids, graph.edges):
            nbrs = [[graph.right_ids[pos], sim] for pos, sim in lst]
            lines.append(json.dumps({"id": lid, "nbrs": nbrs}))
    else:
        for nid, lst in zip(graph.node_ids, graph.adjacency):
            nbrs = [[graph.node_ids[pos], sim] for pos, sim in lst]
            lines.append(json.dumps({"id": nid, "nbrs": nbrs}))
    return lines
