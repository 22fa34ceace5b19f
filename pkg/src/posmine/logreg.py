"""Logistic-regression active-learning baseline with an inference budget.

A from-scratch full-batch gradient-descent logistic regression (mean
log-loss, L2 on weights only, bias unregularized) is retrained each round
on everything labeled so far. Each round scores a uniformly sampled subset
of the remaining pool, capped by the inference budget B, and queries the
top K = ceil(K0 / p_prev) of that subset.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import expit

from .data import Corpus, NEGATIVE, POSITIVE
from .labelprop import adaptive_k
from .oracle import BatchItem, LabelBatch, OracleError
from .runlog import IterationRecord, RunLog, batch_precision

_PROB_EPS = 1e-12


@dataclass(frozen=True)
class LrHyper:
    learning_rate: float = 0.1
    epochs: int = 500
    l2: float = 1e-4


@dataclass
class LrModel:
    weights: np.ndarray
    bias: float
    hyper: LrHyper
    losses: list[float] = field(default_factory=list)


def loss_and_grad(
    weights: np.ndarray,
    bias: float,
    features: np.ndarray,
    targets: np.ndarray,
    l2: float,
) -> tuple[float, np.ndarray, float]:
    """Mean log-loss with L2 on weights, plus its analytic gradient.

    Mean (not summed) loss makes the gradient invariant under dataset
    duplication.
    """
    z = features @ weights + bias
    p = expit(z)
    # log(sigmoid) via logaddexp avoids overflow for large |z|
    loss = float(np.mean(np.logaddexp(0.0, z) - targets * z)) + 0.5 * l2 * float(weights @ weights)
    resid = (p - targets) / targets.shape[0]
    grad_w = features.T @ resid + l2 * weights
    grad_b = float(resid.sum())
    return loss, grad_w, grad_b


def train_logistic(
    features: np.ndarray,
    targets: np.ndarray,
    hyper: LrHyper = LrHyper(),
    init: Optional[tuple[np.ndarray, float]] = None,
) -> LrModel:
    """Full-batch gradient descent; loss history recorded.

    Starts from zero weights unless ``init`` provides a warm start.
    """
    features = np.asarray(features, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    classes = np.unique(targets)
    if classes.size < 2:
        raise ValueError("training data must contain both classes")
    if init is None:
        weights = np.zeros(features.shape[1], dtype=np.float64)
        bias = 0.0
    else:
        weights = np.asarray(init[0], dtype=np.float64).copy()
        bias = float(init[1])
    losses = []
    for _ in range(hyper.epochs):
        loss, grad_w, grad_b = loss_and_grad(weights, bias, features, targets, hyper.l2)
        losses.append(loss)
        weights -= hyper.learning_rate * grad_w
        bias -= hyper.learning_rate * grad_b
    if not (np.isfinite(weights).all() and np.isfinite(bias)):
        raise ArithmeticError("training diverged: non-finite weights")
    return LrModel(weights=weights, bias=bias, hyper=hyper, losses=losses)


def predict_proba(model: LrModel, features: np.ndarray) -> np.ndarray:
    """Sigmoid of the affine score, kept strictly inside (0, 1)."""
    features = np.asarray(features, dtype=np.float64)
    if features.shape[-1] != model.weights.shape[0]:
        raise ValueError(
            f"dimension mismatch: features {features.shape[-1]} vs model {model.weights.shape[0]}"
        )
    p = expit(features @ model.weights + model.bias)
    return np.clip(p, _PROB_EPS, 1.0 - _PROB_EPS)


@dataclass(frozen=True)
class LrBaselineConfig:
    budget: Optional[int] = None     # B; None scores the whole remaining pool
    k0: int = 100
    k_max: Optional[int] = None
    rounds: int = 10
    n_init_negatives: int = 19
    rng_seed: int = 0
    hyper: LrHyper = LrHyper()
    warm_start: bool = False

    def resolved_k_max(self) -> int:
        k_max = self.k_max if self.k_max is not None else 10 * self.k0
        if k_max < self.k0:
            raise ValueError("k_max must be >= k0")
        return k_max

    def validate(self) -> None:
        if self.budget is not None and self.budget < self.k0:
            raise ValueError("budget must be >= k0 when set")
        if self.rounds < 1 or self.k0 < 1 or self.n_init_negatives < 1:
            raise ValueError("rounds, k0, n_init_negatives must be >= 1")
        self.resolved_k_max()


def run_lr_baseline(pool: Corpus, seeds: Corpus, cfg: LrBaselineConfig, oracle) -> RunLog:
    """Budgeted active-learning loop around the logistic model.

    Bootstraps from the synthetic seeds as positives plus n_init_negatives
    known true negatives sampled from the pool. Those negatives are an
    explicit information advantage: they are recorded in the log's extra
    section, excluded from candidate selection, and never counted as
    oracle-labeled.
    """
    cfg.validate()
    k_max = cfg.resolved_k_max()
    rng = np.random.default_rng(cfg.rng_seed)

    negative_positions = [
        pos for pos, rec in enumerate(pool.records) if rec.truth_label == NEGATIVE
    ]
    if len(negative_positions) < cfg.n_init_negatives:
        raise ValueError("pool lacks enough known negatives for initialization")
    init_neg = rng.choice(len(negative_positions), size=cfg.n_init_negatives, replace=False)
    init_neg_ids = [pool.ids[negative_positions[int(i)]] for i in init_neg]

    pool_matrix = pool.matrix.astype(np.float64)
    feats = [seeds.matrix.astype(np.float64), pool_matrix[[pool.id_index[i] for i in init_neg_ids]]]
    targs = [np.ones(len(seeds)), np.zeros(len(init_neg_ids))]

    log = RunLog(strategy="lr", seed_ids=list(seeds.ids), pool_size=len(pool))
    log.extra["init_negative_ids"] = list(init_neg_ids)
    log.extra["scored_per_round"] = []
    excluded = set(init_neg_ids)
    labeled: set[str] = set()

    p_prev = 1.0
    model = None
    for r in range(1, cfg.rounds + 1):
        init = (model.weights, model.bias) if (cfg.warm_start and model) else None
        model = train_logistic(np.vstack(feats), np.concatenate(targs), cfg.hyper, init=init)
        remaining = [i for i in pool.ids if i not in labeled and i not in excluded]
        if not remaining:
            break
        if cfg.budget is not None and cfg.budget < len(remaining):
            sample_idx = rng.choice(len(remaining), size=cfg.budget, replace=False)
            sample_ids = [remaining[int(i)] for i in sample_idx]
        else:
            sample_ids = remaining
        log.extra["scored_per_round"].append(len(sample_ids))
        probs = predict_proba(model, pool_matrix[[pool.id_index[i] for i in sample_ids]])

        k = adaptive_k(cfg.k0, p_prev, k_max)
        ranked = sorted(zip(sample_ids, probs), key=lambda t: (-t[1], t[0]))
        batch_ids = [i for i, _ in ranked[:k]]
        batch = LabelBatch(
            batch_id=f"lr-{r:04d}",
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
        feats.append(pool_matrix[[pool.id_index[i] for i in batch_ids]])
        targs.append(np.array([1.0 if labels[i] == POSITIVE else 0.0 for i in batch_ids]))
        p_prev = log.iterations[-1].batch_precision
    return log
