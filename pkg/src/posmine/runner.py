"""Strategy dispatch: turn a validated RunConfig into a completed run.

Owns the pieces every entry point shares: corpus loading, seed selection,
oracle wiring (with ledger persistence and replay), optional LSH, and
report emission. Both the CLI and the HTTP service go through here.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .config import RunConfig
from .data import Corpus, load_corpus, normalize_unit
from .graphs import EXACT_PAIRWISE_LIMIT, LshIndex, build_lsh_index
from .ibg import IbgConfig, run_ibg
from .labelprop import LpRunConfig, run_lp
from .logreg import LrBaselineConfig, LrHyper, run_lr_baseline
from .metrics import EvalPoint, emit_report, evaluate
from .oracle import LedgeredOracle, NoisyOracle, RunLedger, TruthOracle
from .runlog import RunLog
from .seeding import SeedConfig, acs_select, sample_random_seeds


@dataclass
class RunArtifacts:
    log: RunLog
    points: list[EvalPoint]
    ledger_path: Path
    report_path: Optional[Path]


def load_datasets(cfg: RunConfig) -> tuple[Corpus, Corpus]:
    pool = load_corpus(cfg.real_path, source="real")
    seeds = load_corpus(cfg.seeds_path, source="synthetic")
    if cfg.normalize:
        pool = normalize_unit(pool)
        seeds = normalize_unit(seeds)
    return pool, seeds


def select_seeds(synthetic: Corpus, cfg: RunConfig) -> list[str]:
    seeding = cfg.seeding
    if seeding["method"] == "file":
        if not seeding.get("file"):
            raise ValueError("seeding method 'file' requires a seed id file")
        ids = [
            line.strip()
            for line in Path(seeding["file"]).read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]
        return ids
    seed_cfg = SeedConfig(
        k=seeding["k"], c=seeding["c"], method=seeding["method"], rng_seed=cfg.rng_seed
    )
    if seeding["method"] == "acs":
        return acs_select(synthetic, seed_cfg)
    return sample_random_seeds(synthetic, seed_cfg)


def maybe_lsh_index(pool: Corpus, cfg: RunConfig) -> Optional[LshIndex]:
    mode = cfg.graph["lsh"]
    if mode == "off":
        return None
    if mode == "auto" and len(pool) <= EXACT_PAIRWISE_LIMIT:
        return None
    return build_lsh_index(
        pool,
        n_tables=cfg.graph["lsh_tables"],
        n_bits=cfg.graph["lsh_bits"],
        rng_seed=cfg.rng_seed,
    )


def build_oracle(pool: Corpus, cfg: RunConfig):
    mode = cfg.oracle["mode"]
    if mode == "truth":
        return TruthOracle(pool)
    if mode == "noisy":
        return NoisyOracle(pool, flip_prob=cfg.oracle["flip_prob"], rng_seed=cfg.rng_seed)
    raise ValueError("human-oracle runs are driven through the HTTP service")


def execute_run(
    cfg: RunConfig,
    out_dir: str | Path,
    oracle=None,
    report_path: Optional[str | Path] = None,
    run_name: str = "run",
    on_iteration=None,
) -> RunArtifacts:
    """Run the configured strategy end to end.

    ``oracle`` overrides the config's oracle (the service passes its human
    queue). An existing ledger in ``out_dir`` is replayed, resuming an
    interrupted run at the first unanswered batch.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    pool, synthetic = load_datasets(cfg)
    seed_ids = select_seeds(synthetic, cfg)
    seeds = synthetic.subset(seed_ids)

    ledger_path = out_dir / "ledger.jsonl"
    inner = oracle if oracle is not None else build_oracle(pool, cfg)
    wrapped = LedgeredOracle(inner, RunLedger(ledger_path, run_name=run_name))

    index = maybe_lsh_index(pool, cfg)
    log = _dispatch(cfg, pool, seeds, wrapped, index, on_iteration)

    points: list[EvalPoint] = []
    emitted: Optional[Path] = None
    if pool.has_truth_labels():
        points = evaluate(log, pool)
        emitted = Path(report_path) if report_path else out_dir / "report.csv"
        emit_report(points, emitted, format="json" if str(emitted).endswith(".json") else "csv")
    return RunArtifacts(log=log, points=points, ledger_path=ledger_path, report_path=emitted)


class _Observed:
    """Oracle wrapper that reports each answered batch to a callback."""

    def __init__(self, inner, callback):
        self.inner = inner
        self.name = inner.name
        self.callback = callback

    def label(self, batch):
        labels = self.inner.label(batch)
        if self.callback:
            self.callback(batch, labels)
        return labels


def _dispatch(cfg: RunConfig, pool, seeds, oracle, index, on_iteration) -> RunLog:
    if on_iteration is not None:
        oracle = _Observed(oracle, on_iteration)
    if cfg.strategy == "ibg":
        ibg_cfg = IbgConfig(
            tau=cfg.graph["tau"],
            d_max=cfg.graph["d_max"],
            T=cfg.loop["rounds"],
            stop_on_empty_batch=cfg.loop["stop_on_empty_batch"],
        )
        return run_ibg(pool, seeds, ibg_cfg, oracle, index=index)
    if cfg.strategy == "lp":
        lp_cfg = LpRunConfig(
            k0=cfg.loop["k0"],
            rounds=cfg.loop["rounds"],
            t_prop=cfg.loop["t_prop"],
            eps=cfg.loop["eps"],
            k_max=cfg.loop["k_max"],
            tau=cfg.graph["tau"],
            knn_cap=cfg.graph["knn_cap"],
        )
        return run_lp(pool, seeds, lp_cfg, oracle, index=index)
    if cfg.strategy == "lr":
        lr_cfg = LrBaselineConfig(
            budget=cfg.lr["budget"],
            k0=cfg.loop["k0"],
            k_max=cfg.loop["k_max"],
            rounds=cfg.loop["rounds"],
            n_init_negatives=cfg.lr["n_init_negatives"],
            rng_seed=cfg.rng_seed,
            hyper=LrHyper(
                learning_rate=cfg.lr["learning_rate"],
                epochs=cfg.lr["epochs"],
                l2=cfg.lr["l2"],
            ),
        )
        return run_lr_baseline(pool, seeds, lr_cfg, oracle)
    raise ValueError(f"unknown strategy {cfg.strategy!r}")
