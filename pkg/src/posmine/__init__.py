"""Rare-positive mining over embedding similarity graphs.

Expands from synthetic seed examples into a large unlabeled pool using
either iterative bipartite expansion or clamped label propagation, queries
an oracle in batches, and reports cumulative precision/recall. A theory
module evaluates the closed-form single-round precision/recall analysis
and verifies it by Monte Carlo on planted regular graphs.
"""
from .data import Corpus, CorpusError, Record, cosine, dump_corpus, load_corpus, normalize_unit
from .graphs import (
    BipartiteGraph,
    LshIndex,
    NormalizedAdjacency,
    SimilarityGraph,
    build_bipartite,
    build_lsh_index,
    build_similarity_graph,
    row_normalize,
)
from .ibg import IbgConfig, run_ibg
from .labelprop import LpRunConfig, LpState, adaptive_k, propagate, run_lp, select_top_k
from .logreg import (
    LrBaselineConfig,
    LrHyper,
    LrModel,
    predict_proba,
    run_lr_baseline,
    train_logistic,
)
from .metrics import EvalPoint, emit_report, evaluate, random_baseline_curve
from .oracle import (
    LabelBatch,
    LedgeredOracle,
    NoisyOracle,
    OracleError,
    RunLedger,
    TruthOracle,
    run_log_from_ledger,
)
from .runlog import IterationRecord, RunLog
from .seeding import SeedConfig, acs_select, coverage_select, sample_random_seeds
from .theory import (
    MonteCarloResult,
    PlantedGraph,
    TheoryParams,
    expected_precision,
    expected_precision_counting,
    expected_recall,
    generate_planted,
    monte_carlo,
    precision_threshold,
    q2_from_q1,
    s1_s2_counts,
)

__version__ = "0.1.0"
