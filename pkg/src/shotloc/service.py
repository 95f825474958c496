"""HTTP facade over the store and the estimators.

One shared bearer token guards every route. Long-running work goes
through an in-process job queue: submission hashes (kind, collection,
params, collection version) so repeating a request against unchanged
data returns the existing job instead of recomputing, while any edit
to the collection naturally invalidates the key. A failed job does not
block the key; resubmitting starts a fresh attempt.

Estimate results are persisted to the store by the pipeline layer
before the job flips to done, so a done job's result can always be
served. Job objects themselves are process-lifetime only.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import queue
import threading
from contextlib import asynccontextmanager
from dataclasses import dataclass

from fastapi import APIRouter, Body, Depends, FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse, PlainTextResponse, Response
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from . import pipeline
from .errors import (
    Conflict,
    DataError,
    IntegrityViolation,
    NotFound,
    ShotlocError,
)
from .store import Store
from .sync import refine_manual

JOB_KINDS = ("sync", "detect", "estimate_m1", "estimate_m2", "fuse")


# job queue


@dataclass
class Job:
    id: str
    kind: str
    cid: str
    params: dict
    request_hash: str
    status: str = "queued"  # queued -> running -> done | error
    progress: float = 0.0
    result: dict | None = None
    error: str | None = None

    def snapshot(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "collection": self.cid,
            "status": self.status,
            "progress": round(self.progress, 4),
            "error": self.error,
            "request_hash": self.request_hash,
        }


class JobRunner:
    """Bounded worker pool with idempotent, hash-keyed submission."""

    def __init__(self, store: Store, workers: int = 2):
        self.store = store
        self.n_workers = max(1, workers)
        self.jobs: dict[str, Job] = {}
        self.by_hash: dict[str, str] = {}
        self.queue: queue.Queue = queue.Queue()
        self.lock = threading.Lock()
        self._counter = itertools.count(1)
        self._threads: list[threading.Thread] = []
        self.ensure_started()

    def ensure_started(self) -> None:
        with self.lock:
            self._threads = [t for t in self._threads if t.is_alive()]
            for _ in range(self.n_workers - len(self._threads)):
                t = threading.Thread(target=self._loop, daemon=True)
                t.start()
                self._threads.append(t)

    def stop(self) -> None:
        with self.lock:
            alive = [t for t in self._threads if t.is_alive()]
            self._threads = []
        for _ in alive:
            self.queue.put(None)
        for t in alive:
            t.join(timeout=5.0)

    def submit(self, kind: str, cid: str, params: dict) -> Job:
        doc = self.store.get_collection(cid)  # 404s here, not in the worker
        payload = json.dumps(
            {"kind": kind, "cid": cid, "params": params, "version": doc["version"]},
            sort_keys=True,
        )
        request_hash = hashlib.sha1(payload.encode()).hexdigest()
        with self.lock:
            existing = self.by_hash.get(request_hash)
            if existing is not None and self.jobs[existing].status != "error":
                return self.jobs[existing]
            job = Job(
                id=f"j{next(self._counter):04d}",
                kind=kind,
                cid=cid,
                params=params,
                request_hash=request_hash,
            )
            self.jobs[job.id] = job
            self.by_hash[request_hash] = job.id
        self.queue.put(job.id)
        return job

    def get(self, jid: str) -> Job:
        job = self.jobs.get(jid)
        if job is None:
            raise NotFound(f"no job {jid!r}")
        return job

    def _loop(self) -> None:
        while True:
            jid = self.queue.get()
            if jid is None:
                self.queue.task_done()
                return
            job = self.jobs[jid]
            job.status = "running"

            def bump(frac: float, job: Job = job) -> None:
                # monotone regardless of what the producer reports
                job.progress = max(job.progress, min(float(frac), 1.0))

            try:
                result = self._run(job, bump)
                job.result = result  # persisted result set before the flip
                job.progress = 1.0
                job.status = "done"
            except Exception as exc:  # job errors are data, not crashes
                job.error = f"{type(exc).__name__}: {exc}"
                job.status = "error"
            finally:
                self.queue.task_done()

    def _run(self, job: Job, progress) -> dict:
        p = dict(job.params)
        store, cid = self.store, job.cid
        if job.kind == "sync":
            manual = [self._manual_offset(cid, m) for m in p.get("manual", [])]
            return pipeline.sync_collection(
                store,
                cid,
                max_shift_s=p.get("max_shift_s"),
                anchor=p.get("anchor"),
                manual=manual,
                progress=progress,
            )
        if job.kind == "detect":
            cands = pipeline.suggest_marks(
                store,
                cid,
                p["video"],
                ratio_db=p.get("ratio_db", 12.0),
                min_sep_ms=p.get("min_sep_ms", 50.0),
            )
            progress(1.0)
            return {"video": p["video"], "candidates": cands}
        if job.kind == "estimate_m1":
            return pipeline.estimate_m1(
                store,
                cid,
                p["video"],
                event=p.get("event", 0),
                vs_range=tuple(p["vs_range"]),
                vb_range=tuple(p["vb_range"]),
                alpha_deg_range=tuple(p["alpha_deg_range"]),
                elevation_diff=p.get("elevation_diff", 0.0),
                n_samples=p.get("n_samples", 10000),
                seed=p.get("seed", 0),
                progress=progress,
            )
        if job.kind == "estimate_m2":
            return pipeline.estimate_m2(
                store,
                cid,
                p["video_i"],
                p["video_j"],
                event=p.get("event", 0),
                vs_range=tuple(p["vs_range"]),
                jitter_s=p.get("jitter_s", 0.033),
                legacy_center=p.get("legacy_center", False),
                progress=progress,
            )
        if job.kind == "fuse":
            return pipeline.fuse_collection(
                store,
                cid,
                m1_ids=p.get("m1_ids"),
                m2_ids=p.get("m2_ids"),
                cell_m=p.get("cell_m"),
                margin=p.get("margin"),
                mode=p.get("mode", "product"),
                frac=p.get("frac", 0.9),
                progress=progress,
            )
        raise DataError(f"unknown job kind {job.kind!r}")

    def _manual_offset(self, cid: str, m: dict):
        doc = self.store.get_collection(cid)
        fps = {v["id"]: v["fps"] for v in doc["videos"]}
        for key in ("i", "j"):
            if m[key] not in fps:
                raise NotFound(f"video {m[key]!r} not in collection {cid}")
        return refine_manual(
            m["i"], m["j"], m["frame_i"], m["frame_j"], fps[m["i"]], fps[m["j"]]
        )


# request bodies


class PositionIn(BaseModel):
    model_config = ConfigDict(extra="forbid")
    lat: float
    lon: float
    elev: float = 0.0


class CollectionIn(BaseModel):
    model_config = ConfigDict(extra="forbid")
    name: str = "collection"
    frame_origin: PositionIn | None = None


class VideoIn(BaseModel):
    model_config = ConfigDict(extra="forbid")
    path: str
    name: str | None = None
    fps: float = 30.0
    position: PositionIn | None = None


class CameraFixIn(BaseModel):
    model_config = ConfigDict(extra="forbid")
    lat: float
    lon: float
    elev: float = 0.0
    version: int | None = None


class MarkingIn(BaseModel):
    model_config = ConfigDict(extra="forbid")
    event: int = 0
    shock: float | None = None
    muzzle: float | None = None


class MarkingsIn(BaseModel):
    model_config = ConfigDict(extra="forbid")
    markings: list[MarkingIn]
    version: int | None = None


class ManualOffsetIn(BaseModel):
    model_config = ConfigDict(extra="forbid")
    i: str
    j: str
    frame_i: float
    frame_j: float


class SyncParams(BaseModel):
    model_config = ConfigDict(extra="forbid")
    max_shift_s: float | None = None
    anchor: str | None = None
    manual: list[ManualOffsetIn] = Field(default_factory=list)


class DetectParams(BaseModel):
    model_config = ConfigDict(extra="forbid")
    video: str
    ratio_db: float = 12.0
    min_sep_ms: float = 50.0


class M1Params(BaseModel):
    model_config = ConfigDict(extra="forbid")
    video: str
    event: int = 0
    vs_range: tuple[float, float] = (331.3, 346.0)
    vb_range: tuple[float, float] = (400.0, 1000.0)
    alpha_deg_range: tuple[float, float] = (0.0, 15.0)
    elevation_diff: float = 0.0
    n_samples: int = 10000
    seed: int = 0


class M2Params(BaseModel):
    model_config = ConfigDict(extra="forbid")
    video_i: str
    video_j: str
    event: int = 0
    vs_range: tuple[float, float] = (331.3, 346.0)
    jitter_s: float = 0.033
    legacy_center: bool = False


class FuseParams(BaseModel):
    model_config = ConfigDict(extra="forbid")
    m1_ids: list[str] | None = None
    m2_ids: list[str] | None = None
    cell_m: float | None = None
    margin: float | None = None
    mode: str = "product"
    frac: float = 0.9


_PARAM_MODELS = {
    "sync": SyncParams,
    "detect": DetectParams,
    "estimate_m1": M1Params,
    "estimate_m2": M2Params,
    "fuse": FuseParams,
}


# app assembly


def _cid_of(vid: str) -> str:
    return vid.split("-", 1)[0]


def create_app(data_dir, token: str, workers: int = 2) -> FastAPI:
    store = Store(data_dir)
    runner = JobRunner(store, workers=workers)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        runner.ensure_started()
        yield
        runner.stop()

    app = FastAPI(title="shotloc", lifespan=lifespan)
    app.state.store = store
    app.state.runner = runner
    app.state.token = token

    def auth(request: Request) -> None:
        want = f"Bearer {app.state.token}"
        if request.headers.get("authorization") != want:
            raise HTTPException(status_code=401, detail="invalid or missing token")

    api = APIRouter(dependencies=[Depends(auth)])

    @app.exception_handler(ShotlocError)
    async def shotloc_error(request: Request, exc: ShotlocError):
        if isinstance(exc, NotFound):
            code = 404
        elif isinstance(exc, Conflict):
            code = 409
        else:
            # validation, integrity, infeasibility: the request is well
            # formed HTTP but the data cannot support it
            code = 422
        return JSONResponse(
            status_code=code,
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    # collections

    @api.post("/collections", status_code=201)
    def create_collection(body: CollectionIn):
        fo = body.frame_origin.model_dump() if body.frame_origin else None
        return store.create_collection(body.name, frame_origin=fo)

    @api.get("/collections")
    def list_collections():
        return store.list_collections()

    @api.get("/collections/{cid}")
    def get_collection(cid: str):
        return store.get_collection(cid)

    @api.delete("/collections/{cid}")
    def delete_collection(cid: str):
        store.delete_collection(cid)
        return {"deleted": cid}

    # videos

    @api.post("/collections/{cid}/videos", status_code=201)
    def add_video(cid: str, body: VideoIn):
        pos = body.position.model_dump() if body.position else None
        return pipeline.ingest_wav(
            store, cid, body.path, name=body.name, fps=body.fps, position=pos
        )

    @api.get("/videos/{vid}")
    def get_video(vid: str):
        doc = store.get_collection(_cid_of(vid))
        for v in doc["videos"]:
            if v["id"] == vid:
                return v
        raise NotFound(f"video {vid!r} not found")

    @api.put("/videos/{vid}/camera-fix")
    def put_camera_fix(vid: str, body: CameraFixIn):
        return store.update_video(
            _cid_of(vid),
            vid,
            expected_version=body.version,
            position={"lat": body.lat, "lon": body.lon, "elev": body.elev},
        )

    @api.put("/videos/{vid}/markings")
    def put_markings(vid: str, body: MarkingsIn):
        marks = []
        for m in body.markings:
            if m.shock is None and m.muzzle is None:
                raise IntegrityViolation("a marking needs a shock or a muzzle time")
            if m.shock is not None and m.muzzle is not None and m.shock >= m.muzzle:
                raise IntegrityViolation(
                    f"event {m.event}: the shockwave must precede the muzzle blast "
                    f"(got shock {m.shock} >= muzzle {m.muzzle})"
                )
            if m.shock is not None:
                marks.append({"kind": "shock", "t": m.shock, "event": m.event})
            if m.muzzle is not None:
                marks.append({"kind": "muzzle", "t": m.muzzle, "event": m.event})
        return store.set_markings(
            _cid_of(vid), vid, marks, expected_version=body.version
        )

    @api.get("/videos/{vid}/spectrogram")
    def get_spectrogram(vid: str, window: int = 1024, hop: int = 256):
        from .griddump import dump_text

        clip = pipeline.load_video_clip(store, _cid_of(vid), vid)
        values, meta = pipeline.spectrogram_grid(clip, window=window, hop=hop)
        meta["video"] = vid
        return PlainTextResponse(dump_text(values, meta))

    # jobs

    @api.post("/collections/{cid}/jobs/{kind}", status_code=202)
    def submit_job(cid: str, kind: str, params: dict = Body(default_factory=dict)):
        model = _PARAM_MODELS.get(kind)
        if model is None:
            raise NotFound(f"unknown job kind {kind!r}; one of {JOB_KINDS}")
        try:
            checked = model.model_validate(params)
        except ValidationError as exc:
            raise HTTPException(status_code=422, detail=json.loads(exc.json()))
        job = runner.submit(kind, cid, checked.model_dump())
        return job.snapshot()

    @api.get("/jobs/{jid}")
    def get_job(jid: str):
        return runner.get(jid).snapshot()

    @api.get("/jobs/{jid}/result")
    def get_job_result(jid: str):
        job = runner.get(jid)
        if job.status != "done":
            raise Conflict(f"job {jid} is {job.status}, not done")
        return job.result

    # derived views

    @api.get("/collections/{cid}/timeline")
    def get_timeline(cid: str):
        doc = store.get_collection(cid)
        syncs = [r for r in doc["estimates"] if r["kind"] == "sync"]
        if not syncs:
            raise NotFound(f"collection {cid} has no sync estimate yet")
        return syncs[-1]["result"]

    @api.get("/collections/{cid}/estimates/{gunshot}/geojson")
    def get_geojson(cid: str, gunshot: int):
        doc = store.get_collection(cid)
        ids = _event_estimate_ids(doc, gunshot)
        if not ids:
            raise NotFound(f"no estimates for gunshot {gunshot} in {cid}")
        return pipeline.render_features(store, cid, ids)

    @api.get("/collections/{cid}/artifacts/{name}")
    def get_artifact(cid: str, name: str):
        data = store.get_artifact(cid, name)
        if name.endswith(".txt"):
            return PlainTextResponse(data.decode())
        if name.endswith((".json", ".geojson")):
            return Response(content=data, media_type="application/json")
        return Response(content=data, media_type="application/octet-stream")

    app.include_router(api)
    return app


def _event_estimate_ids(doc: dict, gunshot: int) -> list[str]:
    """Latest m1/m2 per input set for this gunshot, plus fuse records
    built purely from those."""
    latest: dict[tuple, dict] = {}
    for rec in doc["estimates"]:
        if rec["kind"] in ("m1", "m2") and rec.get("params", {}).get("event", 0) == gunshot:
            latest[(rec["kind"], tuple(rec["inputs"]))] = rec
    ids = [r["id"] for r in latest.values()]
    event_ids = {
        r["id"]
        for r in doc["estimates"]
        if r["kind"] in ("m1", "m2") and r.get("params", {}).get("event", 0) == gunshot
    }
    for rec in doc["estimates"]:
        if rec["kind"] != "fuse":
            continue
        used = set(rec["result"].get("m1", [])) | set(rec["result"].get("m2", []))
        if used and used <= event_ids:
            ids.append(rec["id"])
    return ids


def serve(data_dir, token: str, host: str = "127.0.0.1", port: int = 8646, workers: int = 2):
    """Blocking entry point used by the command line."""
    import uvicorn

    uvicorn.run(create_app(data_dir, token, workers=workers), host=host, port=port)
