"""Uniform detector-backend interface: descriptor, chunked detection, pooling."""

from __future__ import annotations

import queue
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, Protocol, Sequence, runtime_checkable

from ..core import Detection, ImageBuffer
from ..errors import ProtocolViolationError


@dataclass(frozen=True)
class DetectorBackendDescriptor:
    name: str
    class_names: tuple[str, ...]
    max_batch: int
    supports_whitebox: bool

    def __post_init__(self) -> None:
        if not self.class_names:
            raise ValueError("class_names must be non-empty")
        if self.max_batch < 1:
            raise ValueError("max_batch must be >= 1")
        object.__setattr__(self, "class_names", tuple(self.class_names))


@runtime_checkable
class DetectorBackend(Protocol):
    """The black-box boundary every explainer and metric talks through."""

    def descriptor(self) -> DetectorBackendDescriptor: ...

    def detect_batch(self, images: Sequence[ImageBuffer]) -> list[list[Detection]]: ...

    def close(self) -> None: ...


def detect(backend: DetectorBackend, images: Sequence[ImageBuffer]) -> list[list[Detection]]:
    """Detect on any number of images, chunking by the backend's max_batch."""
    max_batch = backend.descriptor().max_batch
    out: list[list[Detection]] = []
    for i in range(0, len(images), max_batch):
        out.extend(backend.detect_batch(list(images[i : i + max_batch])))
    if len(out) != len(images):
        raise ProtocolViolationError(
            f"backend returned {len(out)} detection lists for {len(images)} images"
        )
    return out


class BackendPool:
    """Fixed-size pool of backend handles, each exclusively owned while acquired.

    Stateful backends (subprocess pipes) must never be used from two threads
    at once; workers borrow a handle for one batch at a time. A stateless
    backend can be wrapped with :meth:`shared`, which hands the same handle
    to everyone.
    """

    def __init__(self, factory: Callable[[], DetectorBackend], size: int = 1):
        if size < 1:
            raise ValueError("pool size must be >= 1")
        self._handles: "queue.Queue[DetectorBackend]" = queue.Queue()
        self._all: list[DetectorBackend] = []
        self._factory = factory
        self._created = 0
        self._size = size
        self._lock = threading.Lock()
        self._shared = False

    @classmethod
    def shared(cls, backend: DetectorBackend) -> "BackendPool":
        pool = cls(lambda: backend, size=1)
        pool._shared = True
        pool._all = [backend]
        return pool

    @contextmanager
    def acquire(self):
        if self._shared:
            yield self._all[0]
            return
        try:
            handle = self._handles.get_nowait()
        except queue.Empty:
            with self._lock:
                if self._created < self._size:
                    handle = self._factory()
                    self._all.append(handle)
                    self._created += 1
                else:
                    handle = None
            if handle is None:
                handle = self._handles.get()
        try:
            yield handle
        finally:
            self._handles.put(handle)

    def close(self) -> None:
        for handle in self._all:
            handle.close()
        self._all = []

    def __enter__(self) -> "BackendPool":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def ensure_pool(backend_or_pool) -> BackendPool:
    if isinstance(backend_or_pool, BackendPool):
        return backend_or_pool
    return BackendPool.shared(backend_or_pool)
