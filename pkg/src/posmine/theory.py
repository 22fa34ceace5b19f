"""Closed-form precision/recall analysis of single-round seed expansion,
plus a Monte Carlo harness that verifies the formulas on planted graphs.

The model: an undirected simple d-regular graph whose planted seed set S
is independent with no vertex adjacent to more than two seeds. A fraction
p of seeds is truly positive (S+); querying S together with the closed
neighborhood N(S+) yields P positives, where a non-seed vertex adjacent to
exactly one (two) positive seeds is positive with probability q1 (q2).
The expansion ratio h = |N(S+)| / |S+| measures how little the seed
neighborhoods overlap; the closed-neighborhood convention puts h in
[1, d+1].
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

MAX_GRAPH_RETRIES = 100
H_TARGET_SLACK = 0.25


class InfeasibleParamsError(ValueError):
    """Parameter combination violates a counting bound."""


class GenerationError(RuntimeError):
    """Constraint satisfaction failed within the retry budget."""


def q2_from_q1(q1: float) -> float:
    """Two independent positive neighbors: q2 = 1 - (1 - q1)^2."""
    if not 0.0 < q1 < 1.0:
        raise ValueError(f"q1 must be in (0, 1), got {q1}")
    return 1.0 - (1.0 - q1) ** 2


@dataclass(frozen=True)
class TheoryParams:
    d: int
    p: float
    q1: float
    q2: float
    h: float
    s_size: int
    v_size: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if not 0.0 < self.p <= 1.0:
            raise ValueError("p must be in (0, 1]")
        if not 0.0 < self.q1 < self.q2 < 2.0 * self.q1:
            raise ValueError("requires 0 < q1 < q2 < 2*q1")
        if not 1.0 <= self.h <= self.d + 1.0:
            raise ValueError(f"h must be in [1, d+1], got {self.h}")
        if self.s_size < 1 or self.v_size < self.s_size:
            raise ValueError("need 1 <= s_size <= v_size")

    @classmethod
    def derived(cls, d: int, p: float, q1: float, h: float,
                s_size: int, v_size: int) -> "TheoryParams":
        return cls(d=d, p=p, q1=q1, q2=q2_from_q1(q1), h=h, s_size=s_size, v_size=v_size)


def expected_precision(params: TheoryParams) -> float:
    """E[P / |Q|] in simplified form."""
    d, p, q1, q2, h = params.d, params.p, params.q1, params.q2, params.h
    return (2.0 * q1 - q2) + (
        1.0 + q2 * (d + 1.0 / p) - q1 * (d + 2.0 / p)
    ) / ((1.0 - p) / p + h)


def expected_precision_counting(params: TheoryParams) -> float:
    """E[P / |Q|] straight from the counting identities (unsimplified)."""
    d, p, q1, q2, h = params.d, params.p, params.q1, params.q2, params.h
    numer = p * ((1.0 - 2.0 * q1 + q2) + (q2 - q1) * d + (2.0 * q1 - q2) * h)
    return numer / (1.0 - p + p * h)


def expected_recall(params: TheoryParams) -> float:
    """E[P / |V|]: positives found over the whole vertex count."""
    d, p, q1, q2, h = params.d, params.p, params.q1, params.q2, params.h
    return (p * params.s_size / params.v_size) * (
        (1.0 - 2.0 * q1 + q2) + (q2 - q1) * d + (2.0 * q1 - q2) * h
    )


def precision_threshold(q1: float, q2: float, d: int) -> float:
    """Validity level p* where precision's trend in h flips sign.

    For p above the threshold precision decreases as h grows; below it,
    precision increases with h.
    """
    if not 0.0 < q1 < q2 < 2.0 * q1:
        raise ValueError("requires 0 < q1 < q2 < 2*q1")
    return (2.0 * q1 - q2) / (1.0 + (q2 - q1) * d)


def s1_s2_counts(h: float, d: int, s_plus_size: int) -> tuple[float, float]:
    """Sizes of the once- and twice-adjacent neighbor shells.

    |S1| = (2h - d - 2)|S+| and |S2| = (d + 1 - h)|S+|, which forces
    h >= (d + 2)/2 for |S1| to be nonnegative.
    """
    if not 1.0 <= h <= d + 1.0:
        raise InfeasibleParamsError(f"h must be in [1, d+1], got {h}")
    s1 = (2.0 * h - d - 2.0) * s_plus_size
    s2 = (d + 1.0 - h) * s_plus_size
    if s1 < 0:
        raise InfeasibleParamsError(
            f"infeasible: |S1| = {s1} < 0 violates h >= (d+2)/2 = {(d + 2) / 2}"
        )
    if s2 < 0:
        raise InfeasibleParamsError(f"infeasible: |S2| = {s2} < 0 violates h <= d+1")
    return s1, s2


# ---------------------------------------------------------------------------
# Planted-graph generation
# ---------------------------------------------------------------------------

@dataclass
class PlantedGraph:
    n: int
    d: int
    neighbors: list[np.ndarray]
    seed_nodes: np.ndarray                    # positions of S
    seed_positive: Optional[np.ndarray] = None  # bool mask over seed_nodes
    labels: Optional[np.ndarray] = None         # bool positives over all nodes

    def seed_adjacency_counts(self) -> np.ndarray:
        """Per-vertex count of adjacent seed nodes."""
        counts = np.zeros(self.n, dtype=np.int64)
        for s in self.seed_nodes:
            counts[self.neighbors[int(s)]] += 1
        return counts

    def check_invariants(self) -> None:
        for v in range(self.n):
            if self.neighbors[v].shape[0] != self.d:
                raise AssertionError(f"node {v} has degree {self.neighbors[v].shape[0]}")
        counts = self.seed_adjacency_counts()
        if counts[self.seed_nodes].any():
            raise AssertionError("seed set is not independent")
        if (counts > 2).any():
            raise AssertionError("a vertex is adjacent to more than two seeds")


def _pair_stubs(n: int, d: int, rng: np.random.Generator) -> Optional[set[tuple[int, int]]]:
    """One attempt of the stub-matching construction.

    Colliding stubs (self-loops / repeated pairs) are re-shuffled among
    themselves until none remain or no valid pairing of the leftovers can
    exist, in which case the attempt fails.
    """
    edges: set[tuple[int, int]] = set()
    stubs = np.repeat(np.arange(n), d)
    while stubs.size:
        rng.shuffle(stubs)
        leftovers: list[int] = []
        it = iter(stubs.tolist())
        for a, b in zip(it, it):
            if a > b:
                a, b = b, a
            if a != b and (a, b) not in edges:
                edges.add((a, b))
            else:
                leftovers.extend((a, b))
        if len(leftovers) == len(stubs):
            # No progress is possible only if every leftover pair is already
            # an edge or a self-pair; check before giving up.
            uniq = sorted(set(leftovers))
            stuck = all(
                (min(a, b), max(a, b)) in edges or a == b
                for i, a in enumerate(uniq)
                for b in uniq[i:]
            )
            if stuck:
                return None
        stubs = np.asarray(leftovers, dtype=np.int64)
    return edges


def random_regular_graph(
    n: int, d: int, rng: np.random.Generator, max_retries: int = MAX_GRAPH_RETRIES
) -> list[np.ndarray]:
    """Simple d-regular graph via stub matching with bounded restarts."""
    if (n * d) % 2 != 0:
        raise ValueError("n * d must be even (handshake parity)")
    if not 0 < d < n:
        raise ValueError("need 0 < d < n")
    for attempt in range(max_retries):
        edges = _pair_stubs(n, d, rng)
        if edges is None:
            continue
        nbrs: list[list[int]] = [[] for _ in range(n)]
        for a, b in edges:
            nbrs[a].append(b)
            nbrs[b].append(a)
        return [np.asarray(sorted(lst), dtype=np.int64) for lst in nbrs]
    raise GenerationError(f"no simple {d}-regular graph after {max_retries} attempts")


def plant_seed_set(
    neighbors: list[np.ndarray],
    s_size: int,
    rng: np.random.Generator,
    max_retries: int = MAX_GRAPH_RETRIES,
) -> np.ndarray:
    """Greedy independent seed planting with the two-seed overlap cap."""
    n = len(neighbors)
    for attempt in range(max_retries):
        counts = np.zeros(n, dtype=np.int64)
        chosen: list[int] = []
        for v in rng.permutation(n):
            v = int(v)
            if counts[v] != 0:
                continue  # adjacent to a seed: would break independence
            if (counts[neighbors[v]] >= 2).any():
                continue  # would push some vertex past two seed neighbors
            chosen.append(v)
            counts[neighbors[v]] += 1
            if len(chosen) == s_size:
                return np.asarray(sorted(chosen), dtype=np.int64)
    raise GenerationError(
        f"could not plant {s_size} seeds under the overlap constraints "
        f"after {max_retries} attempts"
    )


def measure_h(graph: PlantedGraph, positive_seeds: np.ndarray) -> float:
    """|N(S+)| / |S+| with the closed-neighborhood convention."""
    if positive_seeds.size == 0:
        raise ValueError("S+ is empty; h is undefined")
    members: set[int] = set(int(s) for s in positive_seeds)
    for s in positive_seeds:
        members.update(int(u) for u in graph.neighbors[int(s)])
    return len(members) / positive_seeds.size


def generate_planted(
    n: int,
    d: int,
    s_size: int,
    p: float,
    q1: float,
    h_target: Optional[float] = None,
    rng_seed: int = 0,
    max_retries: int = MAX_GRAPH_RETRIES,
) -> PlantedGraph:
    """Planted d-regular instance with realized seed and neighbor labels.

    Seeds flip their own validity coin with probability p; a non-seed
    vertex adjacent to one (two) positive seeds is positive with
    probability q1 (q2 = 1 - (1-q1)^2); everything else is negative. With
    ``h_target`` set, planting resamples until measured h lands within
    +/- 0.25 of the target.
    """
    if not 0.0 < p <= 1.0:
        raise ValueError("p must be in (0, 1]")
    q2 = q2_from_q1(q1)
    if s_size * (d + 1) > n:
        raise ValueError("s_size * (d + 1) must not exceed n")
    rng = np.random.default_rng(rng_seed)
    last_h = None
    for attempt in range(max_retries):
        neighbors = random_regular_graph(n, d, rng)
        seeds = plant_seed_set(neighbors, s_size, rng)
        graph = PlantedGraph(n=n, d=d, neighbors=neighbors, seed_nodes=seeds)
        positive_mask = rng.random(s_size) < p
        if not positive_mask.any():
            continue
        s_plus = seeds[positive_mask]
        if h_target is not None:
            last_h = measure_h(graph, s_plus)
            if abs(last_h - h_target) > H_TARGET_SLACK:
                continue
        labels = np.zeros(n, dtype=bool)
        labels[s_plus] = True
        counts = np.zeros(n, dtype=np.int64)
        for s in s_plus:
            counts[neighbors[int(s)]] += 1
        once = np.nonzero(counts == 1)[0]
        twice = np.nonzero(counts == 2)[0]
        labels[once] = rng.random(once.size) < q1
        labels[twice] = rng.random(twice.size) < q2
        labels[seeds] = False
        labels[s_plus] = True
        graph.seed_positive = positive_mask
        graph.labels = labels
        return graph
    raise GenerationError(
        f"planting failed after {max_retries} attempts "
        f"(seed {rng_seed}, last measured h {last_h})"
    )


# ---------------------------------------------------------------------------
# Monte Carlo verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MonteCarloResult:
    params: TheoryParams            # evaluated at realized p and measured h
    trials: int
    measured_h: float
    precision_mean: float
    precision_stderr: float
    recall_mean: float
    recall_stderr: float
    closed_precision: float
    closed_recall: float

    def precision_gap_sigmas(self) -> float:
        if self.precision_stderr == 0.0:
            return 0.0 if self.precision_mean == self.closed_precision else float("inf")
        return abs(self.precision_mean - self.closed_precision) / self.precision_stderr

    def recall_gap_sigmas(self) -> float:
        if self.recall_stderr == 0.0:
            return 0.0 if self.recall_mean == self.closed_recall else float("inf")
        return abs(self.recall_mean - self.closed_recall) / self.recall_stderr


def monte_carlo(
    n: int,
    d: int,
    s_size: int,
    p: float,
    q1: float,
    trials: int,
    rng_seed: int = 0,
    h_target: Optional[float] = None,
) -> MonteCarloResult:
    """Estimate E[P/|Q|] and E[P/|V|] conditioned on one planted instance.

    The graph, the seed set, and the S+ split (exactly round(p * |S|)
    positives, so realized validity equals p whenever p * |S| is integral)
    are drawn once; each trial realizes only the neighbor labels, drawing
    its own stream from (rng_seed, trial index) so results do not depend
    on scheduling. Closed forms are evaluated at the realized validity and
    the measured h of that instance.
    """
    if trials < 2:
        raise ValueError("need at least 2 trials for a standard error")
    n_plus = int(round(p * s_size))
    if n_plus < 1:
        raise ValueError(f"p = {p} rounds to an empty S+ for |S| = {s_size}")
    q2 = q2_from_q1(q1)

    setup_rng = np.random.default_rng([rng_seed, 0])
    for attempt in range(MAX_GRAPH_RETRIES):
        neighbors = random_regular_graph(n, d, setup_rng)
        seeds = plant_seed_set(neighbors, s_size, setup_rng)
        graph = PlantedGraph(n=n, d=d, neighbors=neighbors, seed_nodes=seeds)
        split = setup_rng.choice(s_size, size=n_plus, replace=False)
        positive_mask = np.zeros(s_size, dtype=bool)
        positive_mask[split] = True
        s_plus = seeds[positive_mask]
        h = measure_h(graph, s_plus)
        if h_target is None or abs(h - h_target) <= H_TARGET_SLACK:
            break
    else:
        raise GenerationError(f"no instance with h near {h_target} after {MAX_GRAPH_RETRIES} tries")

    counts = np.zeros(n, dtype=np.int64)
    for s in s_plus:
        counts[neighbors[int(s)]] += 1
    once = np.nonzero(counts == 1)[0]
    twice = np.nonzero(counts == 2)[0]
    q_size = (s_size - n_plus) + n_plus + once.size + twice.size

    precisions = np.empty(trials, dtype=np.float64)
    recalls = np.empty(trials, dtype=np.float64)
    for t in range(trials):
        trial_rng = np.random.default_rng([rng_seed, 1, t])
        pos1 = int((trial_rng.random(once.size) < q1).sum())
        pos2 = int((trial_rng.random(twice.size) < q2).sum())
        found = n_plus + pos1 + pos2
        precisions[t] = found / q_size
        recalls[t] = found / n

    params = TheoryParams(
        d=d, p=n_plus / s_size, q1=q1, q2=q2, h=h, s_size=s_size, v_size=n
    )
    return MonteCarloResult(
        params=params,
        trials=trials,
        measured_h=h,
        precision_mean=float(precisions.mean()),
        precision_stderr=float(precisions.std(ddof=1) / np.sqrt(trials)),
        recall_mean=float(recalls.mean()),
        recall_stderr=float(recalls.std(ddof=1) / np.sqrt(trials)),
        closed_precision=expected_precision(params),
        closed_recall=expected_recall(params),
    )
