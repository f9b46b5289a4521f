"""HTTP facade over the explanation and evaluation pipeline."""

from .app import create_app
from .artifacts import ArtifactStore
from .jobs import Job, JobManager, QueueFullError

__all__ = ["ArtifactStore", "Job", "JobManager", "QueueFullError", "create_app"]
