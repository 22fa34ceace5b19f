"""HTTP service: create and observe runs, and answer human-oracle batches.

Endpoints:
    POST /runs {config}            -> 201 {"run_id": ...}
    GET  /runs/{id}                -> run record
    GET  /runs/{id}/batch          -> 200 pending batch | 204 none pending
    POST /runs/{id}/labels         -> 200 | 404 | 409 conflict | 422 partial
    GET  /runs/{id}/metrics        -> eval points (truth runs) or progress

Each run executes on its own worker thread; a human-oracle run blocks in
awaiting_labels until a complete batch submission arrives. Labels are
persisted to the append-only ledger as batches complete, so metrics can
always be replayed from disk.
"""
from __future__ import annotations

import threading
import uuid
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Response
from fastapi.responses import JSONResponse

from .config import ConfigError, RunConfig, validate_config_obj
from .data import Corpus
from .metrics import evaluate
from .oracle import (
    HumanQueue,
    PartialSubmissionError,
    QueueOracle,
    RunLedger,
    UnknownItemsError,
)
from .runlog import IterationRecord, RunLog, batch_precision
from .runner import execute_run, load_datasets

VALID_STATES = ("created", "propagating", "awaiting_labels", "done", "failed")

# created -> propagating <-> awaiting_labels -> done/failed; terminal states
# accept nothing further
_LEGAL_TRANSITIONS = {
    "created": {"propagating", "failed"},
    "propagating": {"awaiting_labels", "done", "failed"},
    "awaiting_labels": {"propagating", "failed"},
    "done": set(),
    "failed": set(),
}


@dataclass
class RunRecord:
    run_id: str
    config: RunConfig
    state: str = "created"
    iteration: int = 0
    error: Optional[str] = None
    ledger_path: Optional[str] = None
    queue: HumanQueue = field(default_factory=HumanQueue, repr=False)
    live_log: Optional[RunLog] = None
    pool: Optional[Corpus] = None
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def to_json(self) -> dict:
        return {
            "run_id": self.run_id,
            "state": self.state,
            "iteration": self.iteration,
            "error": self.error,
            "ledger_path": self.ledger_path,
            "strategy": self.config.strategy,
            "oracle_mode": self.config.oracle["mode"],
        }


class RunStore:
    def __init__(self, base_dir: str | Path = "runs"):
        self.base_dir = Path(base_dir)
        self.runs: dict[str, RunRecord] = {}
        self.lock = threading.Lock()

    def create(self, cfg: RunConfig) -> RunRecord:
        run_id = uuid.uuid4().hex[:12]
        record = RunRecord(run_id=run_id, config=cfg)
        with self.lock:
            self.runs[run_id] = record
        return record

    def get(self, run_id: str) -> Optional[RunRecord]:
        with self.lock:
            return self.runs.get(run_id)


def _set_state(record: RunRecord, state: str) -> None:
    assert state in VALID_STATES
    with record.lock:
        if state == record.state:
            return
        if state not in _LEGAL_TRANSITIONS[record.state]:
            raise RuntimeError(f"illegal state transition {record.state} -> {state}")
        record.state = state


def _worker(record: RunRecord, store: RunStore) -> None:
    cfg = record.config
    out_dir = store.base_dir / record.run_id
    record.ledger_path = str(out_dir / "ledger.jsonl")
    pool, _ = load_datasets(cfg)
    record.pool = pool
    record.live_log = RunLog(strategy=cfg.strategy, seed_ids=[], pool_size=len(pool))
    human = cfg.oracle["mode"] == "human"

    oracle = None
    if human:
        oracle = QueueOracle(
            record.queue,
            on_enqueue=lambda batch: _set_state(record, "awaiting_labels"),
            on_answered=lambda batch: _set_state(record, "propagating"),
        )

    def on_iteration(batch, labels):
        ids = batch.item_ids()
        record.live_log.append(
            IterationRecord(
                index=batch.iteration,
                batch_ids=ids,
                labels={i: labels[i] for i in ids},
                batch_precision=batch_precision(ids, {i: labels[i] for i in ids}),
            )
        )
        with record.lock:
            record.iteration = batch.iteration

    _set_state(record, "propagating")
    try:
        execute_run(
            cfg, out_dir, oracle=oracle, run_name=record.run_id, on_iteration=on_iteration
        )
    except Exception as exc:  # noqa: BLE001 - surfaced via the run record
        with record.lock:
            record.error = f"{type(exc).__name__}: {exc}"
            record.state = "failed"
        return
    _set_state(record, "done")


def create_app(store: Optional[RunStore] = None, ui_dir: Optional[str] = None) -> FastAPI:
    store = store or RunStore()
    app = FastAPI(title="posmine")
    app.state.store = store

    @app.post("/runs", status_code=201)
    def create_run(config: dict):
        try:
            cfg = validate_config_obj(config)
        except ConfigError as exc:
            return JSONResponse(status_code=422, content={"detail": str(exc)})
        record = store.create(cfg)
        thread = threading.Thread(target=_worker, args=(record, store), daemon=True)
        thread.start()
        return {"run_id": record.run_id}

    @app.get("/runs/{run_id}")
    def get_run(run_id: str):
        record = store.get(run_id)
        if record is None:
            return JSONResponse(status_code=404, content={"detail": "unknown run"})
        return record.to_json()

    @app.get("/runs/{run_id}/batch")
    def get_batch(run_id: str):
        record = store.get(run_id)
        if record is None:
            return JSONResponse(status_code=404, content={"detail": "unknown run"})
        batch = record.queue.pending()
        if batch is None:
            return Response(status_code=204)
        return {
            "batch_id": batch.batch_id,
            "iteration": batch.iteration,
            "items": [{"id": item.id, "text": item.text} for item in batch.items],
        }

    @app.post("/runs/{run_id}/labels")
    def post_labels(run_id: str, payload: dict):
        record = store.get(run_id)
        if record is None:
            return JSONResponse(status_code=404, content={"detail": "unknown run"})
        with record.lock:
            state = record.state
        if state != "awaiting_labels":
            return JSONResponse(
                status_code=409,
                content={"detail": f"run is {state}, not awaiting labels"},
            )
        batch_id = payload.get("batch_id")
        raw = payload.get("labels", [])
        labels = {entry.get("id"): entry.get("label") for entry in raw}

        # Reject contradictions against the persisted ledger before accepting.
        if record.ledger_path and Path(record.ledger_path).exists():
            known = RunLedger(record.ledger_path).known
            conflicts = sorted(
                i for i, lab in labels.items() if i in known and known[i] != lab
            )
            if conflicts:
                return JSONResponse(
                    status_code=409,
                    content={"detail": "labels contradict the ledger", "ids": conflicts},
                )
        # flip to propagating before waking the worker so the worker's next
        # awaiting_labels transition cannot be overwritten by this handler
        try:
            _set_state(record, "propagating")
        except RuntimeError as exc:
            return JSONResponse(status_code=409, content={"detail": str(exc)})
        try:
            record.queue.submit(batch_id, labels)
        except PartialSubmissionError as exc:
            _set_state(record, "awaiting_labels")
            return JSONResponse(
                status_code=422,
                content={"detail": "incomplete submission", "missing_ids": exc.missing_ids},
            )
        except UnknownItemsError as exc:
            _set_state(record, "awaiting_labels")
            return JSONResponse(
                status_code=422,
                content={"detail": "ids outside the batch", "unknown_ids": exc.unknown_ids},
            )
        except KeyError:
            _set_state(record, "awaiting_labels")
            return JSONResponse(status_code=404, content={"detail": "unknown batch id"})
        except ValueError as exc:
            _set_state(record, "awaiting_labels")
            return JSONResponse(status_code=422, content={"detail": str(exc)})
        return {"status": "accepted"}

    @app.get("/runs/{run_id}/metrics")
    def get_metrics(run_id: str):
        record = store.get(run_id)
        if record is None:
            return JSONResponse(status_code=404, content={"detail": "unknown run"})
        log = record.live_log
        if log is None:
            return {"points": [], "progress": {"labeled": 0, "iterations": 0}}
        if record.pool is not None and record.pool.has_truth_labels():
            points = evaluate(log, record.pool)
            return {"points": [asdict(pt) for pt in points]}
        labeled = log.labeled_ids()
        return {
            "points": [],
            "progress": {
                "labeled": len(labeled),
                "iterations": len(log.iterations),
                "positives_reported": len(log.positives()),
            },
        }

    if ui_dir and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
