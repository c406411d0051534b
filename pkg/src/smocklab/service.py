"""HTTP facade over the pipeline: sessions, simulation jobs, mesh retrieval.

Sessions are persisted as one JSON file each in a store directory, so a
restarted service picks up where it left off. Small patterns (at most
SYNC_NODE_LIMIT smocked-graph nodes) solve synchronously; larger ones run in
a background thread and return a job id. One in-flight simulation per
session; a second request gets 409.
"""

from __future__ import annotations

import json
import threading
import uuid
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import io as sio
from .analysis import classify_pattern, shrinkage
from .arap import full_pipeline
from .errors import SchemaError, SmockLabError
from .gridfree import GridFreeInput, build_gridfree
from .smocked_graph import extract

SYNC_NODE_LIMIT = 200


class SessionStore:
    """One JSON document per session on disk, with per-session locks."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._locks = {}
        self._locks_guard = threading.Lock()

    def lock(self, sid) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(sid, threading.Lock())

    def _path(self, sid):
        return self.root / f"{sid}.json"

    def load(self, sid):
        path = self._path(sid)
        if not path.exists():
            return None
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)

    def save(self, doc):
        path = self._path(doc["id"])
        tmp = path.with_suffix(".tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(sio.canonical_json(doc))
        tmp.replace(path)


def _now():
    return datetime.now(timezone.utc).isoformat()


def _solid_pattern(doc):
    pattern = sio.parse_pattern(doc)
    if isinstance(pattern, GridFreeInput):
        pattern = build_gridfree(pattern)
    return pattern


def _simulate(pattern_doc):
    """Run the pipeline on a pattern document; returns the results block."""
    pattern = _solid_pattern(pattern_doc)
    embed_params, arap_cfg, subdivision = sio.parse_params(pattern_doc)
    design = full_pipeline(pattern, embed_params, arap_cfg, subdivision=subdivision)
    report = classify_pattern(pattern, embed_params)
    emb = design.embedding
    return {
        "converged": all(emb.converged.values()),
        "embedding": {
            "underlay_energy": emb.underlay_energy,
            "pleat_energy": emb.pleat_energy,
            "iterations": emb.iterations,
            "converged": emb.converged,
        },
        "arap_energy": design.arap_energy,
        "constraints": report.to_dict(),
        "shrinkage": shrinkage(pattern, design),
        "mesh": {
            "merged": sio.export_obj_text(design, "merged"),
            "fine": sio.export_obj_text(design, "fine"),
        },
    }


def create_app(store_dir=None) -> FastAPI:
    store = SessionStore(store_dir or Path("/tmp") / "smocklab-sessions")
    app = FastAPI(title="smocklab design service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
        allow_headers=["*"],
    )
    jobs = {}

    @app.exception_handler(SchemaError)
    async def schema_error(_req: Request, exc: SchemaError):
        return JSONResponse(status_code=422,
                            content={"pointer": exc.pointer, "message": exc.message})

    @app.exception_handler(SmockLabError)
    async def domain_error(_req: Request, exc: SmockLabError):
        return JSONResponse(status_code=422,
                            content={"pointer": "", "message": str(exc)})

    def _get_or_404(sid):
        doc = store.load(sid)
        if doc is None:
            raise _HttpStop(404, {"message": f"unknown session {sid}"})
        return doc

    class _HttpStop(Exception):
        def __init__(self, status, body):
            self.status = status
            self.body = body

    @app.exception_handler(_HttpStop)
    async def http_stop(_req: Request, exc: _HttpStop):
        return JSONResponse(status_code=exc.status, content=exc.body)

    @app.get("/healthz")
    async def healthz():
        return Response(content="ok", media_type="text/plain")

    @app.post("/sessions", status_code=201)
    async def create_session(body: dict):
        _solid_pattern(body)  # validate before committing
        sid = uuid.uuid4().hex
        doc = {"id": sid, "pattern": body, "results": None, "updated_at": _now()}
        store.save(doc)
        return {"id": sid}

    @app.get("/sessions/{sid}")
    async def get_session(sid: str):
        doc = _get_or_404(sid)
        out = dict(doc)
        if out.get("results"):
            out["results"] = {k: v for k, v in out["results"].items() if k != "mesh"}
        return out

    @app.put("/sessions/{sid}/pattern")
    async def put_pattern(sid: str, body: dict):
        _solid_pattern(body)
        with store.lock(sid):
            doc = _get_or_404(sid)
            doc["pattern"] = body
            doc["results"] = None  # results describe the old pattern
            doc["updated_at"] = _now()
            store.save(doc)
        return {"id": sid}

    def _run_job(sid, jid):
        try:
            doc = store.load(sid)
            results = _simulate(doc["pattern"])
            with store.lock(sid):
                doc = store.load(sid)
                doc["results"] = results
                doc["updated_at"] = _now()
                store.save(doc)
            jobs[jid]["status"] = "done"
        except Exception as exc:  # job errors surface via status polling
            jobs[jid] = {"status": "failed", "error": str(exc), "session": sid}
        finally:
            jobs[jid].setdefault("status", "done")
            store.lock(sid + ":sim").release()

    @app.post("/sessions/{sid}/simulate")
    async def simulate(sid: str, body: dict | None = None):
        doc = _get_or_404(sid)
        sim_lock = store.lock(sid + ":sim")
        if not sim_lock.acquire(blocking=False):
            raise _HttpStop(409, {"message": "a simulation is already running"})
        pattern_doc = dict(doc["pattern"])
        if body and body.get("params"):
            pattern_doc["params"] = {**(pattern_doc.get("params") or {}),
                                     **body["params"]}
        try:
            graph = extract(_solid_pattern(pattern_doc))
        except SmockLabError:
            sim_lock.release()
            raise
        if graph.num_nodes <= SYNC_NODE_LIMIT:
            try:
                results = _simulate(pattern_doc)
                with store.lock(sid):
                    doc = store.load(sid)
                    doc["results"] = results
                    doc["updated_at"] = _now()
                    store.save(doc)
            finally:
                sim_lock.release()
            return {k: v for k, v in results.items() if k != "mesh"}
        jid = uuid.uuid4().hex
        jobs[jid] = {"status": "running", "session": sid}
        threading.Thread(target=_run_job, args=(sid, jid), daemon=True).start()
        return JSONResponse(status_code=202, content={"job": jid})

    @app.get("/jobs/{jid}")
    async def job_status(jid: str):
        if jid not in jobs:
            raise _HttpStop(404, {"message": f"unknown job {jid}"})
        return jobs[jid]

    @app.get("/sessions/{sid}/result/mesh")
    async def result_mesh(sid: str, variant: str = "merged"):
        doc = _get_or_404(sid)
        if not doc.get("results"):
            raise _HttpStop(404, {"message": "no result for this session"})
        mesh = doc["results"]["mesh"].get(variant)
        if mesh is None:
            raise _HttpStop(422, {"pointer": "/variant",
                                  "message": f"unknown variant {variant!r}"})
        return Response(content=mesh, media_type="text/plain")

    @app.get("/sessions/{sid}/result/diagnostics")
    async def result_diagnostics(sid: str):
        doc = _get_or_404(sid)
        if not doc.get("results"):
            raise _HttpStop(404, {"message": "no result for this session"})
        return {k: v for k, v in doc["results"].items() if k != "mesh"}

    return app
