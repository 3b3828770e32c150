"""HTTP/JSON workbench service: sessions, async cluster runs, merge state.

State model: one JSON document per session under ``data_dir/sessions``;
datasets are content-addressed under ``data_dir/datasets``. Mutations take
the per-session lock and replace the in-memory snapshot wholesale, so
readers never observe a half-applied update. Cluster runs execute on a
small worker pool; clients poll the run resource until it reports done.
Runs left in flight by a crash surface as errored runs after restart.

Error mapping: malformed input 400, unknown ids 404, run still in progress
409, unrunnable parameter combinations 422.
"""

from __future__ import annotations

import hashlib
import json
import os
import secrets
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import asynccontextmanager
from pathlib import Path
from typing import Literal

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel, Field

from .correspondence import (
    cooccurrence,
    correspondence_analysis,
    mca,
)
from .dataset import VasDataSet, bin_to_categories, ingest_csv
from .doc import (
    DocParams,
    SubspaceCluster,
    discrimination_set_size,
    doc_full_coverage,
    estimate_w,
    inner_trial_count,
)
from .errors import DatasetError, ForgeError, NoClusterFound, ParameterError
from .pipeline import run_to_dict, trial_cap
from .synthesis import (
    Dendrogram,
    ProtoPersona,
    build_dendrogram,
    cut_dendrogram,
    describe,
    merge_clusters,
    radar_data,
    report_markdown,
    similarity_matrix,
)


class RunRequest(BaseModel):
    w: float | Literal["auto"] = "auto"
    alpha: float = 0.1
    beta: float
    seed: int


class SimilarityRequest(BaseModel):
    linkage: Literal["average", "single", "complete"] = "average"


class CutRequest(BaseModel):
    height: float = Field(ge=0.0, le=1.0)


class ProtoRequest(BaseModel):
    set: list[str]
    vetoed_dims: list[str] = []
    name: str = ""
    conflict_std: float = 0.15
    preview: bool = False   # compute and return without storing


class SessionRequest(BaseModel):
    dataset: str


class NotFound(ForgeError):
    pass


class Conflict(ForgeError):
    pass


class Store:
    """Disk-backed session and dataset store with single-writer sessions."""

    def __init__(self, data_dir: str):
        self.root = Path(data_dir)
        (self.root / "datasets").mkdir(parents=True, exist_ok=True)
        (self.root / "sessions").mkdir(parents=True, exist_ok=True)
        self._sessions: dict[str, dict] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()
        for path in (self.root / "sessions").glob("*.json"):
            doc = json.loads(path.read_text(encoding="utf-8"))
            for run in doc.get("runs", []):
                if run["status"] in ("queued", "running"):
                    run["status"] = "error"
                    run["error"] = "interrupted by service restart"
            self._sessions[doc["id"]] = doc

    # datasets -------------------------------------------------------------
    def add_dataset(self, data: VasDataSet) -> str:
        text = data.to_json()
        ident = "d" + hashlib.sha256(text.encode()).hexdigest()[:12]
        path = self.root / "datasets" / f"{ident}.json"
        if not path.exists():
            path.write_text(text, encoding="utf-8")
        return ident

    def dataset(self, ident: str) -> VasDataSet:
        path = self.root / "datasets" / f"{ident}.json"
        if not path.exists():
            raise NotFound(f"unknown dataset {ident!r}")
        return VasDataSet.from_json(path.read_text(encoding="utf-8"))

    # sessions ---------------------------------------------------------------
    def create_session(self, dataset_id: str) -> dict:
        self.dataset(dataset_id)   # 404 on unknown dataset
        doc = {"id": "s" + secrets.token_hex(6), "dataset": dataset_id, "runs": [],
               "similarity": None, "dendrogram": None, "cut": None,
               "protos": [], "audit": []}
        with self._registry_lock:
            self._sessions[doc["id"]] = doc
        self._persist(doc)
        return doc

    def session(self, ident: str) -> dict:
        doc = self._sessions.get(ident)
        if doc is None:
            raise NotFound(f"unknown session {ident!r}")
        return doc

    def lock(self, ident: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault(ident, threading.Lock())

    def mutate(self, ident: str, action: str, fn) -> dict:
        """Apply ``fn`` to a copy of the session under its writer lock."""
        with self.lock(ident):
            doc = json.loads(json.dumps(self.session(ident)))
            fn(doc)
            doc["audit"].append({"action": action, "at": time.time()})
            self._sessions[ident] = doc
            self._persist(doc)
            return doc

    def _persist(self, doc: dict) -> None:
        path = self.root / "sessions" / f"{doc['id']}.json"
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(doc, indent=2), encoding="utf-8")
        os.replace(tmp, path)


def _session_clusters(doc: dict) -> list[SubspaceCluster]:
    """Union of all completed runs; on label collisions the later run wins
    (re-running the same beta with new parameters supersedes the old view)."""
    done = [r for r in doc["runs"] if r["status"] == "done"]
    pending = [r for r in doc["runs"] if r["status"] in ("queued", "running")]
    if pending:
        raise Conflict(f"{len(pending)} run(s) still in progress")
    if not done:
        raise NotFound("session has no completed runs")
    merged: dict[str, SubspaceCluster] = {}
    for run in done:
        for c in run["result"]["clusters"]:
            cluster = SubspaceCluster.from_dict(c)
            merged[cluster.id] = cluster
    return list(merged.values())


def create_app(data_dir: str = "forge-sessions", workers: int = 2) -> FastAPI:
    pool = ThreadPoolExecutor(max_workers=workers)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        # drop queued runs; they resurface as interrupted after restart
        pool.shutdown(wait=False, cancel_futures=True)

    app = FastAPI(title="personaforge service", version="0.1.0",
                  openapi_url="/api/spec", lifespan=lifespan)
    store = Store(data_dir)
    app.state.store = store

    app.add_middleware(
        CORSMiddleware,
        allow_origins=[os.environ.get("FORGE_UI_ORIGIN", "*")],
        allow_methods=["*"], allow_headers=["*"])

    @app.exception_handler(ForgeError)
    async def forge_error(request: Request, exc: ForgeError):
        status = 400
        if isinstance(exc, NotFound):
            status = 404
        elif isinstance(exc, Conflict):
            status = 409
        elif isinstance(exc, (ParameterError, NoClusterFound)):
            status = 422
        return JSONResponse({"error": {"type": type(exc).__name__, "message": str(exc)}},
                            status_code=status)

    @app.exception_handler(RequestValidationError)
    async def validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse({"error": {"type": "ValidationError", "detail": exc.errors()}},
                            status_code=400)

    @app.get("/params/preview")
    def params_preview(dims: int, beta: float, alpha: float = 0.1):
        """Derived r and m for a parameter choice, so UIs never compute them."""
        r = discrimination_set_size(dims, beta)
        cap = trial_cap()
        try:
            m = inner_trial_count(alpha, r, cap)
            return {"r": r, "m": m, "cap": cap, "over_cap": False,
                    "beta_warning": beta > 0.5}
        except ParameterError:
            return {"r": r, "m": None, "cap": cap, "over_cap": True,
                    "beta_warning": beta > 0.5}

    # --- datasets -----------------------------------------------------------
    @app.post("/datasets")
    async def upload_dataset(request: Request):
        raw = await request.body()
        text = raw.decode("utf-8", errors="replace")
        if text.lstrip().startswith("{"):
            data = VasDataSet.from_json(text)
        else:
            data = ingest_csv(text)
        ident = store.add_dataset(data)
        return {"id": ident, "subjects": len(data.subjects),
                "dimensions": len(data.dimensions)}

    @app.get("/datasets/{dataset_id}")
    def get_dataset(dataset_id: str):
        return json.loads(store.dataset(dataset_id).to_json())

    # --- sessions -------------------------------------------------------------
    @app.post("/sessions")
    def create_session(body: SessionRequest):
        return store.create_session(body.dataset)

    @app.get("/sessions/{sid}")
    def get_session(sid: str):
        doc = store.session(sid)
        return {"id": doc["id"], "dataset": doc["dataset"],
                "runs": [{"id": r["id"], "params": r["params"], "status": r["status"]}
                         for r in doc["runs"]],
                "cut": doc["cut"],
                "protos": [p["name"] for p in doc["protos"]],
                "audit": doc["audit"]}

    # --- cluster runs ----------------------------------------------------------
    def execute_run(sid: str, run_id: str):
        doc = store.session(sid)
        run = next(r for r in doc["runs"] if r["id"] == run_id)
        try:
            data = store.dataset(doc["dataset"])
            p = run["params"]
            w = p["w"]
            if w == "auto":
                w = estimate_w(data).suggested
            params = DocParams(w=float(w), alpha=p["alpha"], beta=p["beta"],
                               seed=p["seed"], trial_cap=trial_cap())
            result = doc_full_coverage(data, params)
            payload = run_to_dict(result)

            def done(d):
                r = next(r for r in d["runs"] if r["id"] == run_id)
                r["status"] = "done"
                r["result"] = payload
            store.mutate(sid, f"run {run_id} done", done)
        except Exception as exc:   # the run must never take the worker down
            def failed(d):
                r = next(r for r in d["runs"] if r["id"] == run_id)
                r["status"] = "error"
                r["error"] = f"{type(exc).__name__}: {exc}"
            store.mutate(sid, f"run {run_id} failed", failed)

    @app.post("/sessions/{sid}/runs", status_code=202)
    def start_run(sid: str, body: RunRequest):
        doc = store.session(sid)
        w = 1.0 if body.w == "auto" else body.w
        DocParams(w=w, alpha=body.alpha, beta=body.beta, seed=body.seed)
        # reject combinations that could never run before queueing anything
        data = store.dataset(doc["dataset"])
        r = discrimination_set_size(len(data.dimensions), body.beta)
        if r > len(data.subjects) - 1:
            raise ParameterError(
                f"discrimination set size r={r} needs more subjects than the dataset has")
        inner_trial_count(body.alpha, r, trial_cap())
        run_id = "r" + secrets.token_hex(4)

        def add(d):
            d["runs"].append({"id": run_id, "params": body.model_dump(),
                              "status": "queued"})
        store.mutate(sid, f"run {run_id} queued", add)
        pool.submit(execute_run, sid, run_id)
        return {"run": run_id, "status": "queued"}

    @app.get("/sessions/{sid}/runs/{run_id}")
    def run_status(sid: str, run_id: str):
        doc = store.session(sid)
        for run in doc["runs"]:
            if run["id"] == run_id:
                out = {"run": run_id, "status": run["status"], "params": run["params"]}
                if run["status"] == "done":
                    out["result"] = run["result"]
                if run["status"] == "error":
                    out["error"] = run["error"]
                return out
        raise NotFound(f"unknown run {run_id!r}")

    @app.get("/sessions/{sid}/clusters")
    def get_clusters(sid: str):
        clusters = _session_clusters(store.session(sid))
        return {"clusters": [c.to_dict() for c in clusters]}

    # --- similarity, dendrogram, merging -----------------------------------------
    @app.post("/sessions/{sid}/similarity")
    def compute_similarity(sid: str, body: SimilarityRequest):
        clusters = _session_clusters(store.session(sid))
        sims = similarity_matrix(clusters)
        dend = build_dendrogram(sims, body.linkage)

        def apply(d):
            d["similarity"] = {"linkage": body.linkage, "ids": list(sims.ids),
                               "matrix": sims.matrix.tolist()}
            d["dendrogram"] = dend.to_dict()
        store.mutate(sid, f"similarity {body.linkage}", apply)
        return {"ids": list(sims.ids), "matrix": sims.matrix.tolist(),
                "linkage": body.linkage}

    @app.get("/sessions/{sid}/dendrogram")
    def get_dendrogram(sid: str):
        doc = store.session(sid)
        if not doc["dendrogram"]:
            raise NotFound("similarity has not been computed for this session")
        return doc["dendrogram"]

    @app.post("/sessions/{sid}/cut")
    def cut(sid: str, body: CutRequest):
        doc = store.session(sid)
        if not doc["dendrogram"]:
            raise NotFound("similarity has not been computed for this session")
        dend = Dendrogram.from_dict(doc["dendrogram"])
        sets = cut_dendrogram(dend, body.height)
        store.mutate(sid, f"cut {body.height}",
                     lambda d: d.update(cut={"height": body.height, "sets": sets}))
        return {"height": body.height, "sets": sets}

    @app.post("/sessions/{sid}/protos")
    def make_proto(sid: str, body: ProtoRequest):
        doc = store.session(sid)
        clusters = {c.id: c for c in _session_clusters(doc)}
        unknown = [cid for cid in body.set if cid not in clusters]
        if unknown:
            raise NotFound(f"unknown cluster ids {unknown}")
        persona = merge_clusters([clusters[cid] for cid in body.set],
                                 conflict_std=body.conflict_std)
        dims = {d.id for d in store.dataset(doc["dataset"]).dimensions}
        bad_veto = set(body.vetoed_dims) - dims
        if bad_veto:
            raise NotFound(f"unknown dimensions {sorted(bad_veto)}")
        persona = persona.without_dims(body.vetoed_dims)
        name = body.name or f"Proto-{len(doc['protos']) + 1}"
        persona = ProtoPersona(persona.sources, persona.members, persona.dims, name)
        meta = {d.id: d for d in store.dataset(doc["dataset"]).dimensions}
        payload = persona.to_dict() | {"description": describe(persona, meta),
                                       "vetoed_dims": list(body.vetoed_dims)}
        if body.preview:
            return payload

        def apply(d):
            d["protos"] = [p for p in d["protos"] if p["name"] != name] + [payload]
        store.mutate(sid, f"proto {name}", apply)
        return payload

    @app.get("/sessions/{sid}/radar")
    def radar(sid: str, a: str, b: str):
        doc = store.session(sid)
        entities = {c.id: c for c in _session_clusters(doc)}
        entities.update({p["name"]: ProtoPersona.from_dict(p) for p in doc["protos"]})
        missing = [x for x in (a, b) if x not in entities]
        if missing:
            raise NotFound(f"unknown cluster or persona ids {missing}")
        meta = {d.id: d for d in store.dataset(doc["dataset"]).dimensions}
        return radar_data(entities[a], entities[b], meta)

    # --- comparison analytics ------------------------------------------------
    @app.get("/sessions/{sid}/cooccurrence")
    def get_cooccurrence(sid: str, exclude: str = ""):
        doc = store.session(sid)
        clusters = _session_clusters(doc)
        ids = tuple(x for x in exclude.split(",") if x)
        table = cooccurrence(clusters, exclude=ids,
                             subjects=store.dataset(doc["dataset"]).subject_ids)
        return {"subjects": list(table.subject_ids), "counts": table.counts.tolist(),
                "excluded": list(table.excluded)}

    @app.get("/sessions/{sid}/ca")
    def get_ca(sid: str, exclude: str = ""):
        doc = store.session(sid)
        clusters = _session_clusters(doc)
        ids = tuple(x for x in exclude.split(",") if x)
        table = cooccurrence(clusters, exclude=ids,
                             subjects=store.dataset(doc["dataset"]).subject_ids)
        pmap = correspondence_analysis(table.counts, row_ids=table.subject_ids,
                                       col_ids=table.subject_ids)
        return pmap.to_dict()

    @app.get("/sessions/{sid}/mca")
    def get_mca(sid: str):
        doc = store.session(sid)
        data = store.dataset(doc["dataset"])
        return mca(bin_to_categories(data)).to_dict()

    @app.get("/sessions/{sid}/report", response_class=PlainTextResponse)
    def report(sid: str):
        doc = store.session(sid)
        personas = [ProtoPersona.from_dict(p) for p in doc["protos"]]
        meta = {d.id: d for d in store.dataset(doc["dataset"]).dimensions}
        return Response(report_markdown(personas, meta), media_type="text/markdown")

    return app
