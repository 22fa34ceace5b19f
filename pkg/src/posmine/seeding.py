"""Seed selection from the synthetic pool.

Two methods: uniform random sampling, and a greedy coverage selection that
bisects over a cosine radius and, at each radius, greedily picks the point
covering the most yet-uncovered pool members until a target fraction of
the pool is covered. The returned radius is the largest one at which the
pick budget still reaches the coverage target, which pushes the selection
toward spread-out, representative points.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Corpus
from .graphs import _unit_rows

RADIUS_TOL = 1e-3


class CoverageInfeasibleError(RuntimeError):
    """Coverage target unreachable even at the minimum radius."""

    def __init__(self, achieved: float, target: float):
        self.achieved = achieved
        self.target = target
        super().__init__(
            f"coverage infeasible: achieved {achieved:.3f} of target {target:.3f} "
            "at minimum radius"
        )


@dataclass(frozen=True)
class SeedConfig:
    k: int
    c: float = 0.5
    method: str = "random"  # random | acs
    rng_seed: int = 0

    def validate(self, pool_size: int) -> None:
        if not 1 <= self.k <= pool_size:
            raise ValueError(f"k must be in [1, {pool_size}], got {self.k}")
        if not 0.0 < self.c <= 1.0:
            raise ValueError(f"c must be in (0, 1], got {self.c}")
        if self.method not in ("random", "acs"):
            raise ValueError(f"unknown seed method {self.method!r}")


def sample_random_seeds(pool: Corpus, cfg: SeedConfig) -> list[str]:
    """k distinct ids drawn uniformly without replacement."""
    cfg.validate(len(pool))
    rng = np.random.default_rng(cfg.rng_seed)
    picks = rng.choice(len(pool), size=cfg.k, replace=False)
    return [pool.ids[int(i)] for i in picks]


def _greedy_cover(
    nbr: np.ndarray, id_rank: np.ndarray, k: int, target: int
) -> tuple[list[int], int]:
    """Greedy max-coverage: up to k picks, stopping once target is covered.

    Ties on coverage gain break toward the smaller id.
    """
    n = nbr.shape[0]
    uncovered = np.ones(n, dtype=np.int64)  # int64 so the matmul cannot wrap
    picked_mask = np.zeros(n, dtype=bool)
    picks: list[int] = []
    covered = 0
    while len(picks) < k and covered < target:
        gains = nbr @ uncovered
        gains[picked_mask] = -1
        best = int(gains.max())
        if best <= 0:
            break
        tied = np.nonzero(gains == best)[0]
        choice = int(tied[np.argmin(id_rank[tied])])
        picks.append(choice)
        picked_mask[choice] = True
        uncovered[nbr[choice].astype(bool)] = 0
        covered += best
    return picks, covered


def coverage_select(pool: Corpus, cfg: SeedConfig) -> tuple[list[str], float, int]:
    """Coverage selection returning (ids, discovered radius, covered count).

    Bisects the cosine radius to the largest value at which k greedy picks
    still cover at least a c-fraction of the pool; neighborhoods are
    {x : cos(x, s) >= r}, seed included.
    """
    cfg.validate(len(pool))
    n = len(pool)
    target = int(np.ceil(cfg.c * n - 1e-9))
    unit = _unit_rows(pool.matrix, pool.ids)
    sims = np.clip(unit @ unit.T, -1.0, 1.0)
    id_rank = np.empty(n, dtype=np.int64)
    id_rank[np.argsort(np.asarray(pool.ids, dtype=object))] = np.arange(n)

    def attempt(radius: float) -> tuple[list[int], int]:
        return _greedy_cover((sims >= radius).astype(np.uint8), id_rank, cfg.k, target)

    lo, hi = -1.0, 1.0
    picks, covered = attempt(lo)
    if covered < target:
        raise CoverageInfeasibleError(covered / n, cfg.c)
    while hi - lo > RADIUS_TOL:
        mid = 0.5 * (lo + hi)
        mid_picks, mid_covered = attempt(mid)
        if mid_covered >= target:
            lo, picks, covered = mid, mid_picks, mid_covered
        else:
            hi = mid
    return [pool.ids[i] for i in picks], lo, covered


def acs_select(pool: Corpus, cfg: SeedConfig) -> list[str]:
    """Up to k ids whose radius neighborhoods cover >= c of the pool."""
    return coverage_select(pool, cfg)[0]
