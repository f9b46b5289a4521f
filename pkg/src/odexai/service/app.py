"""HTTP facade: image upload, detection, explanation jobs, evaluation, artifacts.

Single-node and filesystem-backed: artifacts are content-addressed files,
jobs persist their state across restarts, and the web UI bundle is served
statically under /ui.
"""

from __future__ import annotations

import hashlib
import json
import threading
from contextlib import asynccontextmanager
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.responses import HTMLResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from ..core import BBox, Detection
from ..detectors import BackendPool, backend_factory
from ..detectors.synthetic import SyntheticBackend
from ..detectors.wire import detection_from_wire, detection_to_wire
from ..errors import (
    ArtifactNotFoundError,
    BackendTimeoutError,
    BackendUnavailableError,
    OdexaiError,
)
from ..explainers import (
    ExplainerConfig,
    Method,
    TargetSpec,
    explain,
    save_pgm16,
)
from ..explainers.config import parse_pgm_bytes
from ..harness.benchmark import BenchmarkReport, aggregate
from ..harness.report import spider_axes
from ..imageproc import decode_png_bytes
from ..metrics import MetricConfig, evaluate_all
from .artifacts import ArtifactStore
from .jobs import JobManager, QueueFullError

DEFAULT_MAX_IMAGE_BYTES = 16 * 1024 * 1024


# ---------------------------------------------------------------------------
# response schemas (published via /openapi.json)


class ImageUploadResponse(BaseModel):
    image_id: str


class DetectionModel(BaseModel):
    index: int
    bbox: list[float] = Field(min_length=4, max_length=4)
    objectness: float
    class_probs: list[float]
    label: int
    class_name: str


class DetectResponse(BaseModel):
    detections: list[DetectionModel]
    token: str


class JobModel(BaseModel):
    job_id: str
    kind: str
    state: str
    progress: float
    result_ref: dict | None
    error: str | None
    created_at: float


class EnqueuedResponse(BaseModel):
    job_id: str


class BackendInfo(BaseModel):
    name: str
    spec: str


class BackendsResponse(BaseModel):
    backends: list[BackendInfo]


class DetectRequest(BaseModel):
    image_id: str
    backend: str = "synthetic"


class ExplainRequest(BaseModel):
    image_id: str
    backend: str = "synthetic"
    method: str = "drise"
    target_index: int
    detections_token: str | None = None
    config: dict = Field(default_factory=dict)


class EvaluateRequest(BaseModel):
    image_id: str
    saliency_ref: str
    target_index: int
    backend: str = "synthetic"
    detections_token: str | None = None
    roi: list[float] | None = None
    config: dict = Field(default_factory=dict)


# ---------------------------------------------------------------------------


class ServiceState:
    def __init__(
        self,
        root: Path,
        backends: dict[str, str],
        queue_limit: int,
        workers: int,
        pool_size: int,
        max_image_bytes: int,
    ):
        self.root = Path(root)
        self.store = ArtifactStore(self.root / "artifacts")
        self.jobs = JobManager(self.root / "jobs", workers=workers, queue_limit=queue_limit)
        self.backend_specs = dict(backends)
        self.max_image_bytes = max_image_bytes
        self.pool_size = pool_size
        self.detections_dir = self.root / "detections"
        self.detections_dir.mkdir(parents=True, exist_ok=True)
        self._pools: dict[str, BackendPool] = {}
        self._lock = threading.Lock()

    def pool(self, name: str) -> BackendPool:
        if name not in self.backend_specs:
            raise HTTPException(404, f"unknown backend {name!r}")
        with self._lock:
            if name not in self._pools:
                spec = self.backend_specs[name]
                try:
                    if spec == "synthetic":
                        self._pools[name] = BackendPool.shared(SyntheticBackend())
                    else:
                        self._pools[name] = BackendPool(backend_factory(spec), size=self.pool_size)
                except OdexaiError as exc:
                    raise HTTPException(502, f"backend {name!r} unavailable: {exc}") from exc
            return self._pools[name]

    def snapshot_path(self, image_id: str, backend: str) -> Path:
        digest = hashlib.sha256(f"{image_id}\x00{backend}".encode()).hexdigest()[:32]
        return self.detections_dir / f"{digest}.json"

    def save_snapshot(self, image_id: str, backend: str, detections: list[Detection]) -> dict:
        payload = [detection_to_wire(d) for d in detections]
        token = hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]
        snapshot = {"image_id": image_id, "backend": backend, "token": token, "detections": payload}
        self.snapshot_path(image_id, backend).write_text(json.dumps(snapshot))
        return snapshot

    def load_snapshot(self, image_id: str, backend: str) -> dict | None:
        path = self.snapshot_path(image_id, backend)
        if not path.exists():
            return None
        return json.loads(path.read_text())

    def close(self) -> None:
        self.jobs.close()
        for pool in self._pools.values():
            pool.close()


def create_app(
    root,
    backends: dict[str, str] | None = None,
    ui_dir=None,
    queue_limit: int = 32,
    workers: int = 2,
    pool_size: int = 2,
    max_image_bytes: int = DEFAULT_MAX_IMAGE_BYTES,
) -> FastAPI:
    state = ServiceState(
        Path(root),
        backends if backends is not None else {"synthetic": "synthetic"},
        queue_limit,
        workers,
        pool_size,
        max_image_bytes,
    )

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        yield
        state.close()

    app = FastAPI(title="odexai service", version="0.1.0", lifespan=lifespan)
    app.state.odexai = state

    @app.post("/api/images", response_model=ImageUploadResponse, status_code=200)
    async def upload_image(request: Request) -> ImageUploadResponse:
        body = await request.body()
        if len(body) > state.max_image_bytes:
            raise HTTPException(413, f"image exceeds {state.max_image_bytes} bytes")
        try:
            decode_png_bytes(body)
        except Exception as exc:  # Pillow raises a zoo of types for bad bytes
            raise HTTPException(400, f"not a decodable PNG image: {exc}") from exc
        return ImageUploadResponse(image_id=state.store.put(body))

    @app.post("/api/detect", response_model=DetectResponse)
    def detect_endpoint(req: DetectRequest) -> DetectResponse:
        try:
            image = decode_png_bytes(state.store.get(req.image_id))
        except ArtifactNotFoundError:
            raise HTTPException(404, f"unknown image {req.image_id!r}") from None
        pool = state.pool(req.backend)
        try:
            with pool.acquire() as backend:
                class_names = backend.descriptor().class_names
                detections = backend.detect_batch([image])[0]
        except (BackendUnavailableError, BackendTimeoutError) as exc:
            raise HTTPException(502, f"backend {req.backend!r} unavailable: {exc}") from exc
        snapshot = state.save_snapshot(req.image_id, req.backend, detections)
        return DetectResponse(
            detections=[
                DetectionModel(
                    index=i,
                    **detection_to_wire(d),
                    label=d.label,
                    class_name=class_names[d.label] if d.label < len(class_names) else str(d.label),
                )
                for i, d in enumerate(detections)
            ],
            token=snapshot["token"],
        )

    def _target_from_snapshot(req_image_id, req_backend, target_index, token) -> Detection:
        snapshot = state.load_snapshot(req_image_id, req_backend)
        if snapshot is None:
            raise HTTPException(409, "no detections stored for this image/backend; run detect first")
        if token is not None and token != snapshot["token"]:
            raise HTTPException(409, "detections were re-run since the target was selected")
        if not 0 <= target_index < len(snapshot["detections"]):
            raise HTTPException(409, f"target_index {target_index} out of range")
        return detection_from_wire(snapshot["detections"][target_index])

    @app.post("/api/explain", response_model=EnqueuedResponse)
    def explain_endpoint(req: ExplainRequest) -> EnqueuedResponse:
        if not state.store.has(req.image_id):
            raise HTTPException(404, f"unknown image {req.image_id!r}")
        pool = state.pool(req.backend)  # 404 for unknown backend
        target = _target_from_snapshot(req.image_id, req.backend, req.target_index, req.detections_token)
        try:
            cfg = ExplainerConfig(method=Method(req.method), **req.config)
        except (ValueError, TypeError) as exc:
            raise HTTPException(422, f"bad explainer config: {exc}") from exc

        def run(set_progress):
            image = decode_png_bytes(state.store.get(req.image_id))
            set_progress(0.05)
            with pool.acquire() as backend:
                capture = None
                if cfg.method is Method.GCAME:
                    capture = backend.capture(image, "", req.target_index)
                result = explain(
                    backend, image, TargetSpec(target, req.image_id), cfg, capture=capture
                )
            set_progress(0.9)
            import io

            buf = io.BytesIO()
            save_pgm16(result.saliency.values, buf)
            saliency_ref = state.store.put(buf.getvalue())
            sidecar = {
                "method": result.method.value,
                "config_digest": result.config_digest,
                "elapsed_s": result.elapsed_s,
                "image_id": req.image_id,
                "target_bbox": list(target.bbox.as_tuple()),
            }
            sidecar_ref = state.store.put(json.dumps(sidecar, sort_keys=True).encode())
            return {
                "saliency_pgm": saliency_ref,
                "sidecar": sidecar_ref,
                "width": image.width,
                "height": image.height,
                "elapsed_s": result.elapsed_s,
            }

        try:
            job = state.jobs.submit("explain", run)
        except QueueFullError as exc:
            raise HTTPException(429, str(exc)) from exc
        return EnqueuedResponse(job_id=job.job_id)

    @app.post("/api/evaluate", response_model=EnqueuedResponse)
    def evaluate_endpoint(req: EvaluateRequest) -> EnqueuedResponse:
        if not state.store.has(req.image_id):
            raise HTTPException(404, f"unknown image {req.image_id!r}")
        if not state.store.has(req.saliency_ref):
            raise HTTPException(404, f"unknown saliency artifact {req.saliency_ref!r}")
        pool = state.pool(req.backend)
        target = _target_from_snapshot(req.image_id, req.backend, req.target_index, req.detections_token)
        image = decode_png_bytes(state.store.get(req.image_id))
        try:
            saliency_values = parse_pgm_bytes(state.store.get(req.saliency_ref))
        except ValueError as exc:
            raise HTTPException(422, f"saliency artifact is not a PGM: {exc}") from exc
        if saliency_values.shape != (image.height, image.width):
            raise HTTPException(
                422,
                f"saliency {saliency_values.shape[1]}x{saliency_values.shape[0]} does not "
                f"match image {image.width}x{image.height}",
            )
        try:
            cfg = MetricConfig(**req.config)
        except (ValueError, TypeError) as exc:
            raise HTTPException(422, f"bad metric config: {exc}") from exc
        roi = BBox(*req.roi) if req.roi else target.bbox

        def run(set_progress):
            from ..core import SaliencyMap
            from ..explainers.config import ExplanationResult, config_digest

            set_progress(0.05)
            sidecar_method = Method.DRISE  # metrics do not depend on the producing method
            explanation = ExplanationResult(
                SaliencyMap(saliency_values),
                0.0,
                sidecar_method,
                config_digest(ExplainerConfig(method=sidecar_method)),
            )
            with pool.acquire() as backend:
                class_names = backend.descriptor().class_names
                record = evaluate_all(
                    backend,
                    image,
                    explanation,
                    target,
                    roi,
                    cfg,
                    model=req.backend,
                    dataset="interactive",
                    image_id=req.image_id,
                    instance_id=f"target{req.target_index}",
                    category=class_names[target.label] if target.label < len(class_names) else "",
                )
            report = BenchmarkReport(config={}, records=(record,), aggregates=aggregate([record]))
            axes = spider_axes(report, "three_axis")[record.method]
            payload = {
                "record": record.to_dict(),
                "axes": [
                    {
                        "name": a.name,
                        "value": a.value,
                        "raw": a.raw,
                        "higher_better": a.higher_better,
                    }
                    for a in axes
                ],
            }
            record_ref = state.store.put(json.dumps(payload, sort_keys=True).encode())
            return {"record": record_ref, **payload}

        try:
            job = state.jobs.submit("evaluate", run)
        except QueueFullError as exc:
            raise HTTPException(429, str(exc)) from exc
        return EnqueuedResponse(job_id=job.job_id)

    @app.get("/api/jobs/{job_id}", response_model=JobModel)
    def get_job(job_id: str) -> JobModel:
        job = state.jobs.get(job_id)
        if job is None:
            raise HTTPException(404, f"unknown job {job_id!r}")
        return JobModel(**job.to_dict())

    @app.get("/api/artifacts/{ref}")
    def get_artifact(ref: str) -> Response:
        try:
            data = state.store.get(ref)
        except ArtifactNotFoundError:
            raise HTTPException(404, f"unknown artifact {ref!r}") from None
        if data.startswith(b"\x89PNG"):
            media = "image/png"
        elif data.startswith(b"P5"):
            media = "image/x-portable-graymap"
        elif data.startswith((b"{", b"[")):
            media = "application/json"
        else:
            media = "application/octet-stream"
        # Content-addressed, hence immutable and cacheable forever.
        return Response(data, media_type=media, headers={"Cache-Control": "max-age=31536000, immutable"})

    @app.get("/api/backends", response_model=BackendsResponse)
    def list_backends() -> BackendsResponse:
        return BackendsResponse(
            backends=[BackendInfo(name=n, spec=s) for n, s in sorted(state.backend_specs.items())]
        )

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    else:

        @app.get("/ui", response_class=HTMLResponse)
        def ui_placeholder() -> str:
            return "<html><body><h1>odexai</h1><p>Web UI bundle not built; see frontend/README.md.</p></body></html>"

    return app
