"""Durable background jobs: bounded queue, worker threads, on-disk state.

Explanations run for minutes at paper-scale mask counts, so all heavy work
is asynchronous. Every state transition is persisted atomically; jobs found
queued or running after a restart re-fail deterministically instead of
vanishing.
"""

from __future__ import annotations

import json
import os
import queue
import tempfile
import threading
import time
import uuid
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

RESTART_ERROR = "RestartError: job interrupted by service restart"


@dataclass
class Job:
    job_id: str
    kind: str  # explain | evaluate | bench
    state: str = "queued"  # queued -> running -> done | failed
    progress: float = 0.0
    result_ref: dict | None = None
    error: str | None = None
    created_at: float = field(default_factory=time.time)

    def to_dict(self) -> dict:
        return asdict(self)


class QueueFullError(Exception):
    pass


class JobManager:
    def __init__(self, root, workers: int = 2, queue_limit: int = 32):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._jobs: dict[str, Job] = {}
        self._lock = threading.Lock()
        self._queue: "queue.Queue[tuple[str, Callable] | None]" = queue.Queue(maxsize=queue_limit)
        self._recover()
        self._workers = [
            threading.Thread(target=self._worker_loop, daemon=True) for _ in range(workers)
        ]
        for worker in self._workers:
            worker.start()

    def _recover(self) -> None:
        for path in sorted(self.root.glob("*.json")):
            try:
                job = Job(**json.loads(path.read_text()))
            except (json.JSONDecodeError, TypeError):
                continue
            if job.state in ("queued", "running"):
                job.state = "failed"
                job.error = RESTART_ERROR
                self._persist(job)
            self._jobs[job.job_id] = job

    def _persist(self, job: Job) -> None:
        path = self.root / f"{job.job_id}.json"
        fd, tmp = tempfile.mkstemp(dir=self.root, prefix=".tmp-")
        with os.fdopen(fd, "w") as handle:
            json.dump(job.to_dict(), handle)
        os.replace(tmp, path)

    def submit(self, kind: str, fn: Callable[[Callable[[float], None]], dict]) -> Job:
        """Enqueue fn; it receives a progress setter and returns the result refs."""
        job = Job(job_id=uuid.uuid4().hex, kind=kind)
        with self._lock:
            self._jobs[job.job_id] = job
            self._persist(job)
        try:
            self._queue.put_nowait((job.job_id, fn))
        except queue.Full:
            with self._lock:
                job.state = "failed"
                job.error = "queue full"
                self._persist(job)
            raise QueueFullError(f"job queue is full ({self._queue.maxsize})") from None
        return job

    def get(self, job_id: str) -> Job | None:
        with self._lock:
            return self._jobs.get(job_id)

    def _transition(self, job_id: str, **changes) -> None:
        with self._lock:
            job = self._jobs[job_id]
            for key, value in changes.items():
                setattr(job, key, value)
            # Progress never moves backwards.
            job.progress = max(job.progress, changes.get("progress", job.progress))
            self._persist(job)

    def _worker_loop(self) -> None:
        while True:
            item = self._queue.get()
            if item is None:
                return
            job_id, fn = item
            self._transition(job_id, state="running", progress=0.01)

            def set_progress(value: float, job_id=job_id) -> None:
                self._transition(job_id, progress=min(max(value, 0.0), 1.0))

            try:
                result = fn(set_progress)
                self._transition(job_id, state="done", progress=1.0, result_ref=result)
            except Exception as exc:  # noqa: BLE001 - job boundaries report, never crash
                self._transition(job_id, state="failed", error=f"{type(exc).__name__}: {exc}")

    def close(self) -> None:
        for _ in self._workers:
            self._queue.put(None)
        for worker in self._workers:
            worker.join(timeout=5)
