"""Command-line entry points.

Verbs: ingest, seed, build-graph, run-ibg, run-lp, run-lr, simulate-theory,
report, serve. Run verbs accept --config (a JSON RunConfig) with explicit
flags taking precedence.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .config import ConfigError, validate_config_obj
from .data import load_corpus, normalize_unit
from .graphs import build_bipartite, build_lsh_index, build_similarity_graph, dump_graph_lines
from .metrics import emit_report, evaluate
from .oracle import run_log_from_ledger
from .runner import execute_run
from .seeding import SeedConfig, acs_select, sample_random_seeds
from .theory import monte_carlo


def _cmd_ingest(args) -> int:
    pool = load_corpus(args.real, source="real")
    seeds = load_corpus(args.seeds, source="synthetic")
    if not args.no_normalize:
        pool = normalize_unit(pool)
        seeds = normalize_unit(seeds)
    overlap = set(pool.ids) & set(seeds.ids)
    if overlap:
        print(f"error: {len(overlap)} ids shared between pool and seeds", file=sys.stderr)
        return 1
    print(f"real pool: {len(pool)} records, dimension {pool.dimension}")
    print(f"seed pool: {len(seeds)} records, dimension {seeds.dimension}")
    if args.check:
        labeled = sum(1 for r in pool.records if r.truth_label is not None)
        print(f"truth labels present: {labeled}/{len(pool)}")
    return 0


def _cmd_seed(args) -> int:
    pool = normalize_unit(load_corpus(args.pool, source="synthetic"))
    cfg = SeedConfig(k=args.k, c=args.c, method=args.method, rng_seed=args.seed)
    ids = acs_select(pool, cfg) if args.method == "acs" else sample_random_seeds(pool, cfg)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(ids) + "\n", encoding="utf-8")
    print(f"selected {len(ids)} seeds -> {out}")
    return 0


def _cmd_build_graph(args) -> int:
    pool = normalize_unit(load_corpus(args.real, source="real"))
    index = None
    if args.lsh == "on" or (args.lsh == "auto" and len(pool) > 20_000):
        index = build_lsh_index(pool, rng_seed=args.seed)
    if args.seeds:
        seeds = normalize_unit(load_corpus(args.seeds, source="synthetic"))
        graph = build_bipartite(seeds, pool, args.tau, args.dmax, index=index)
        n_edges = sum(len(e) for e in graph.edges)
    else:
        graph = build_similarity_graph(pool, args.tau, knn_cap=args.knn_cap, index=index)
        n_edges = sum(len(a) for a in graph.adjacency) // 2
    print(f"built graph with {n_edges} edges (tau={args.tau})")
    if args.out:
        Path(args.out).write_text("\n".join(dump_graph_lines(graph)) + "\n", encoding="utf-8")
        print(f"dump -> {args.out}")
    return 0


def _run_config_from_args(args, strategy: str):
    obj: dict = {}
    if args.config:
        obj = json.loads(Path(args.config).read_text(encoding="utf-8"))
    obj["strategy"] = strategy
    obj.setdefault("data", {})
    if args.real:
        obj["data"]["real"] = args.real
    if args.seeds:
        obj["data"]["seeds"] = args.seeds
    graph = obj.setdefault("graph", {})
    if getattr(args, "tau", None) is not None:
        graph["tau"] = args.tau
    if getattr(args, "dmax", None) is not None:
        graph["d_max"] = args.dmax
    if getattr(args, "knn_cap", None) is not None:
        graph["knn_cap"] = args.knn_cap
    loop = obj.setdefault("loop", {})
    if getattr(args, "T", None) is not None:
        loop["rounds"] = args.T
    if getattr(args, "rounds", None) is not None:
        loop["rounds"] = args.rounds
    if getattr(args, "k0", None) is not None:
        loop["k0"] = args.k0
    lr = obj.setdefault("lr", {})
    if getattr(args, "budget", None) is not None:
        lr["budget"] = args.budget
    if getattr(args, "init_negs", None) is not None:
        lr["n_init_negatives"] = args.init_negs
    if args.oracle:
        obj.setdefault("oracle", {})["mode"] = args.oracle
    if getattr(args, "flip_prob", None) is not None:
        obj.setdefault("oracle", {})["flip_prob"] = args.flip_prob
    if args.seed is not None:
        obj["rng_seed"] = args.seed
    if args.out_dir:
        obj["output_dir"] = args.out_dir
    if args.seed_method:
        obj.setdefault("seeding", {})["method"] = args.seed_method
    if getattr(args, "seed_k", None) is not None:
        obj.setdefault("seeding", {})["k"] = args.seed_k
    if args.seed_file:
        obj.setdefault("seeding", {}).update({"method": "file", "file": args.seed_file})
    return validate_config_obj(obj)


def _cmd_run(args, strategy: str) -> int:
    try:
        cfg = _run_config_from_args(args, strategy)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    artifacts = execute_run(cfg, cfg.output_dir, report_path=args.report)
    log = artifacts.log
    print(f"{strategy}: {len(log.iterations)} iterations, "
          f"{len(log.labeled_ids())} labeled, {len(log.positives())} positives")
    if log.failure:
        print(f"run aborted: {log.failure}", file=sys.stderr)
        return 1
    if artifacts.report_path:
        print(f"report -> {artifacts.report_path}")
    print(f"ledger -> {artifacts.ledger_path}")
    return 0


def _cmd_simulate_theory(args) -> int:
    rows = []
    for d in args.d:
        for p in args.p:
            for q1 in args.q1:
                res = monte_carlo(
                    n=args.n, d=d, s_size=args.s, p=p, q1=q1,
                    trials=args.trials, rng_seed=args.seed,
                )
                rows.append(res)
                print(
                    f"d={d} p={p} q1={q1} h={res.measured_h:.3f} "
                    f"precision {res.precision_mean:.4f} (closed {res.closed_precision:.4f}) "
                    f"recall {res.recall_mean:.4f} (closed {res.closed_recall:.4f})"
                )
    if args.out:
        header = ("n,d,s,p,q1,q2,measured_h,trials,"
                  "closed_precision,empirical_precision,precision_stderr,"
                  "closed_recall,empirical_recall,recall_stderr")
        lines = [header]
        for r in rows:
            pr = r.params
            lines.append(
                f"{pr.v_size},{pr.d},{pr.s_size},{pr.p!r},{pr.q1!r},{pr.q2!r},"
                f"{r.measured_h!r},{r.trials},"
                f"{r.closed_precision!r},{r.precision_mean!r},{r.precision_stderr!r},"
                f"{r.closed_recall!r},{r.recall_mean!r},{r.recall_stderr!r}"
            )
        Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
        print(f"table -> {args.out}")
    return 0


def _cmd_report(args) -> int:
    pool = load_corpus(args.pool, source="real")
    log = run_log_from_ledger(args.run, pool_size=len(pool))
    points = evaluate(log, pool)
    out = args.out or (Path(args.run).with_suffix(".report." + args.format))
    emit_report(points, out, format=args.format)
    print(f"{len(points)} eval points -> {out}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import RunStore, create_app

    app = create_app(RunStore(args.runs_dir), ui_dir=args.ui_dir)
    host = args.host or os.environ.get("POSMINE_HOST", "127.0.0.1")
    uvicorn.run(app, host=host, port=args.port)
    return 0


def _add_run_flags(sp, with_dmax=False, with_lp=False, with_lr=False):
    sp.add_argument("--config", help="JSON run config; flags override")
    sp.add_argument("--real", help="real pool jsonl")
    sp.add_argument("--seeds", help="synthetic pool jsonl")
    sp.add_argument("--tau", type=float, default=None)
    if with_dmax:
        sp.add_argument("--dmax", type=int, default=None)
        sp.add_argument("--T", type=int, default=None, help="iteration budget")
    if with_lp:
        sp.add_argument("--k0", type=int, default=None)
        sp.add_argument("--rounds", type=int, default=None)
        sp.add_argument("--knn-cap", dest="knn_cap", type=int, default=None)
    if with_lr:
        sp.add_argument("--budget", type=int, default=None)
        sp.add_argument("--k0", type=int, default=None)
        sp.add_argument("--rounds", type=int, default=None)
        sp.add_argument("--init-negs", dest="init_negs", type=int, default=None)
    sp.add_argument("--oracle", choices=["truth", "noisy"], default=None)
    sp.add_argument("--flip-prob", dest="flip_prob", type=float, default=None,
                    help="label flip probability for the noisy oracle")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--seed-method", choices=["random", "acs"], default=None)
    sp.add_argument("--seed-k", dest="seed_k", type=int, default=None,
                    help="number of seeds to select")
    sp.add_argument("--seed-file", default=None, help="file of seed ids, one per line")
    sp.add_argument("--out-dir", default=None)
    sp.add_argument("--report", default=None, help="metrics table path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="posmine")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("ingest", help="load and validate embedding files")
    sp.add_argument("--real", required=True)
    sp.add_argument("--seeds", required=True)
    sp.add_argument("--check", action="store_true")
    sp.add_argument("--no-normalize", action="store_true")

    sp = sub.add_parser("seed", help="select seed ids from the synthetic pool")
    sp.add_argument("--pool", required=True)
    sp.add_argument("--method", choices=["random", "acs"], default="acs")
    sp.add_argument("--k", type=int, default=100)
    sp.add_argument("--c", type=float, default=0.5)
    sp.add_argument("--seed", type=int, default=7)
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("build-graph", help="build and optionally dump a graph")
    sp.add_argument("--real", required=True)
    sp.add_argument("--seeds", help="build a bipartite graph instead of a similarity graph")
    sp.add_argument("--tau", type=float, default=0.8)
    sp.add_argument("--dmax", type=int, default=32)
    sp.add_argument("--knn-cap", dest="knn_cap", type=int, default=None)
    sp.add_argument("--lsh", choices=["auto", "on", "off"], default="auto")
    sp.add_argument("--seed", type=int, default=7)
    sp.add_argument("--out")

    sp = sub.add_parser("run-ibg", help="iterative bipartite expansion")
    _add_run_flags(sp, with_dmax=True)
    sp = sub.add_parser("run-lp", help="iterative label propagation")
    _add_run_flags(sp, with_lp=True)
    sp = sub.add_parser("run-lr", help="logistic-regression baseline")
    _add_run_flags(sp, with_lr=True)

    sp = sub.add_parser("simulate-theory", help="verify closed forms by Monte Carlo")
    sp.add_argument("--n", type=int, default=2000)
    sp.add_argument("--d", type=int, nargs="+", default=[10])
    sp.add_argument("--s", type=int, default=50)
    sp.add_argument("--p", type=float, nargs="+", default=[0.7])
    sp.add_argument("--q1", type=float, nargs="+", default=[0.5])
    sp.add_argument("--trials", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=7)
    sp.add_argument("--out")

    sp = sub.add_parser("report", help="replay a ledger into a metrics table")
    sp.add_argument("--run", required=True, help="ledger jsonl path")
    sp.add_argument("--pool", required=True)
    sp.add_argument("--format", choices=["csv", "json"], default="csv")
    sp.add_argument("--out")

    sp = sub.add_parser("serve", help="start the HTTP service")
    sp.add_argument("--host", default=None)
    sp.add_argument("--port", type=int, default=8000)
    sp.add_argument("--runs-dir", default="runs")
    sp.add_argument("--ui-dir", default=None, help="static labeling console to mount at /ui")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "ingest":
        return _cmd_ingest(args)
    if args.command == "seed":
        return _cmd_seed(args)
    if args.command == "build-graph":
        return _cmd_build_graph(args)
    if args.command == "run-ibg":
        return _cmd_run(args, "ibg")
    if args.command == "run-lp":
        return _cmd_run(args, "lp")
    if args.command == "run-lr":
        return _cmd_run(args, "lr")
    if args.command == "simulate-theory":
        return _cmd_simulate_theory(args)
    if args.command == "report":
        return _cmd_report(args)
    if args.command == "serve":
        return _cmd_serve(args)
    raise AssertionError(args.command)


if __name__ == "__main__":
    raise SystemExit(main())
