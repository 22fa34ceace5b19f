"""Generate the clustered benchmark corpus and race the three strategies.

Writes the corpus, one metrics CSV per strategy, and the analytic random
baseline into --out (default bench_out/). Everything is seeded, so reruns
reproduce the same files byte for byte.
"""
import argparse
import time
from pathlib import Path

import numpy as np

from posmine.bench import make_benchmark, max_cross_class_cosine
from posmine.data import dump_corpus
from posmine.ibg import IbgConfig, run_ibg
from posmine.labelprop import LpRunConfig, run_lp
from posmine.logreg import LrBaselineConfig, run_lr_baseline
from posmine.metrics import emit_report, evaluate, random_baseline_curve
from posmine.oracle import TruthOracle
from posmine.seeding import SeedConfig, acs_select


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="bench_out")
    parser.add_argument("--rounds", type=int, default=30)
    parser.add_argument("--tau", type=float, default=0.8)
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    pool, synth = make_benchmark()
    dump_corpus(pool, out / "real.jsonl")
    dump_corpus(synth, out / "synthetic.jsonl")
    print(f"pool {len(pool)} ({pool.dimension}-dim), synthetic {len(synth)}")
    print(f"max cross-class cosine {max_cross_class_cosine(pool):.3f}")

    oracle = TruthOracle(pool)
    seeds = synth.subset(acs_select(synth, SeedConfig(k=100, c=0.5, method="acs", rng_seed=7)))
    print(f"coverage-selected seeds: {len(seeds)}")

    t0 = time.time()
    lp = evaluate(run_lp(pool, seeds, LpRunConfig(k0=100, rounds=args.rounds,
                                                  tau=args.tau, knn_cap=32), oracle), pool)
    emit_report(lp, out / "lp.csv")
    print(f"lp: recall {lp[-1].recall_cum:.3f} at ratio {lp[-1].query_ratio:.3f} "
          f"({time.time()-t0:.1f}s)")

    t0 = time.time()
    ibg = evaluate(run_ibg(pool, seeds, IbgConfig(tau=args.tau, d_max=32, T=10), oracle), pool)
    emit_report(ibg, out / "ibg.csv")
    print(f"ibg: recall {ibg[-1].recall_cum:.3f} at ratio {ibg[-1].query_ratio:.3f} "
          f"({time.time()-t0:.1f}s)")

    t0 = time.time()
    lr = evaluate(
        run_lr_baseline(pool, seeds,
                        LrBaselineConfig(budget=8000, k0=100, rounds=args.rounds,
                                         n_init_negatives=19, rng_seed=7),
                        oracle),
        pool,
    )
    emit_report(lr, out / "lr_b8000.csv")
    print(f"lr (B=8000): recall {lr[-1].recall_cum:.3f} at ratio {lr[-1].query_ratio:.3f} "
          f"({time.time()-t0:.1f}s)")

    base = random_baseline_curve(0.10, len(pool), np.linspace(0.0, 1.0, 21))
    emit_report(base, out / "random_baseline.csv")
    print(f"tables -> {out}/")


if __name__ == "__main__":
    main()
