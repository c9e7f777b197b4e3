"""HTTP job API steering the planner.

Single-process studio service: jobs are submitted as multipart uploads
(image + config JSON), executed by a small worker pool, and polled until
done. Replans patch a finished job's config and reuse cached Step 1-2
artifacts when only later-stage parameters changed. Job results live in
memory under an LRU cap; errors use a uniform {code, message} JSON shape.
"""

from __future__ import annotations

import json
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from fastapi import FastAPI, File, Form, Request, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response

from .config import ConfigError, PlanConfig, config_from_dict, config_to_dict
from .imgio import image_from_bytes
from .pipeline import PlanResult, StageCache, run_plan_job
from .raster import RasterError

MAX_PAYLOAD_BYTES = 32 * 1024 * 1024
JOB_TABLE_CAP = 64
DEFAULT_WORKERS = 2


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message
        super().__init__(message)


@dataclass
class JobRecord:
    id: str
    state: str  # queued -> running -> done | failed
    config: dict
    image_bytes: bytes
    error: str | None = None
    result: PlanResult | None = None
    sequence: int = 0

    def public_view(self) -> dict:
        view = {
            "id": self.id,
            "state": self.state,
            "config": self.config,
            "error": self.error,
            "result": None,
        }
        if self.result is not None:
            view["result"] = {
                "stroke_count": len(self.result.strokes),
                "plan_hash": self.result.plan_hash,
                "timings": self.result.timings,
            }
        return view


@dataclass
class JobStore:
    capacity: int = JOB_TABLE_CAP
    lock: threading.Lock = field(default_factory=threading.Lock)
    jobs: dict[str, JobRecord] = field(default_factory=dict)
    counter: int = 0

    def insert(self, record: JobRecord):
        with self.lock:
            self.counter += 1
            record.sequence = self.counter
            self.jobs[record.id] = record
            self._evict()

    def _evict(self):
        # oldest finished jobs go first; running jobs are never evicted
        while len(self.jobs) > self.capacity:
            finished = [
                j for j in self.jobs.values() if j.state in ("done", "failed")
            ]
            if not finished:
                break
            oldest = min(finished, key=lambda j: j.sequence)
            del self.jobs[oldest.id]

    def get(self, job_id: str) -> JobRecord:
        with self.lock:
            record = self.jobs.get(job_id)
        if record is None:
            raise ApiError(404, "not_found", f"no job with id {job_id}")
        return record

    def delete(self, job_id: str):
        with self.lock:
            if job_id not in self.jobs:
                raise ApiError(404, "not_found", f"no job with id {job_id}")
            del self.jobs[job_id]


def create_app(
    default_config: PlanConfig | None = None, workers: int = DEFAULT_WORKERS
) -> FastAPI:
    app = FastAPI(title="strokeforge", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = JobStore()
    cache = StageCache()
    executor = ThreadPoolExecutor(max_workers=workers)
    base_config = config_to_dict(default_config) if default_config else config_to_dict(PlanConfig())
    app.state.store = store

    def execute(record: JobRecord):
        record.state = "running"
        try:
            config = config_from_dict(record.config)
            image = image_from_bytes(record.image_bytes, name="upload")
            record.result = run_plan_job(
                image, config, image_bytes=record.image_bytes, cache=cache
            )
            record.state = "done"
        except Exception as exc:
            record.error = str(exc)
            record.state = "failed"

    def submit(config_doc: dict, image_bytes: bytes) -> JobRecord:
        try:
            config_from_dict(config_doc)  # validate before queuing
        except ConfigError:
            raise
        record = JobRecord(
            id=uuid.uuid4().hex[:12], state="queued", config=config_doc, image_bytes=image_bytes
        )
        store.insert(record)
        executor.submit(execute, record)
        return record

    @app.exception_handler(ApiError)
    async def handle_api_error(request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status, content={"code": exc.code, "message": exc.message}
        )

    @app.exception_handler(ConfigError)
    async def handle_config_error(request: Request, exc: ConfigError):
        return JSONResponse(
            status_code=422, content={"code": "invalid_config", "message": str(exc)}
        )

    @app.exception_handler(RasterError)
    async def handle_raster_error(request: Request, exc: RasterError):
        return JSONResponse(
            status_code=422, content={"code": "invalid_input", "message": str(exc)}
        )

    @app.middleware("http")
    async def payload_cap(request: Request, call_next):
        length = request.headers.get("content-length")
        if length is not None and int(length) > MAX_PAYLOAD_BYTES:
            return JSONResponse(
                status_code=413,
                content={"code": "payload_too_large", "message": "payload exceeds 32 MiB"},
            )
        return await call_next(request)

    @app.post("/api/jobs")
    async def create_job(image: UploadFile = File(...), config: str = Form("{}")):
        blob = await image.read()
        if len(blob) > MAX_PAYLOAD_BYTES:
            raise ApiError(413, "payload_too_large", "image exceeds 32 MiB")
        try:
            user_doc = json.loads(config) if config.strip() else {}
        except json.JSONDecodeError as exc:
            raise ConfigError("", f"invalid config JSON: {exc}")
        merged = _merge_patch(base_config, user_doc)
        record = submit(merged, blob)
        return {"id": record.id}

    @app.get("/api/jobs/{job_id}")
    async def get_job(job_id: str):
        return store.get(job_id).public_view()

    @app.get("/api/jobs/{job_id}/result.png")
    async def get_result(job_id: str):
        record = store.get(job_id)
        if record.state != "done" or record.result is None:
            raise ApiError(409, "not_ready", f"job {job_id} is {record.state}")
        return Response(content=record.result.png, media_type="image/png")

    @app.get("/api/jobs/{job_id}/strokes")
    async def get_strokes(job_id: str):
        record = store.get(job_id)
        if record.state != "done" or record.result is None:
            raise ApiError(409, "not_ready", f"job {job_id} is {record.state}")
        return Response(content=record.result.plan_json, media_type="application/json")

    @app.post("/api/jobs/{job_id}/replan")
    async def replan(job_id: str, request: Request):
        record = store.get(job_id)
        try:
            patch = json.loads(await request.body() or b"{}")
        except json.JSONDecodeError as exc:
            raise ConfigError("", f"invalid patch JSON: {exc}")
        merged = _merge_patch(record.config, patch)
        new_record = submit(merged, record.image_bytes)
        return {"id": new_record.id}

    @app.delete("/api/jobs/{job_id}")
    async def delete_job(job_id: str):
        store.delete(job_id)
        return {"deleted": job_id}

    return app


def _merge_patch(base: dict, patch) -> dict:
    """RFC 7386-style merge: objects merge recursively, scalars replace."""
    if not isinstance(patch, dict):
        raise ConfigError("", "config patch must be a JSON object")
    merged = dict(base)
    for key, value in patch.items():
        if key in merged and isinstance(merged[key], dict) and isinstance(value, dict):
            merged[key] = _merge_patch(merged[key], value)
        else:
            merged[key] = value
    return merged
