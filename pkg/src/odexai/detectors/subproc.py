"""Subprocess backend: drives a child process speaking wire protocol v1."""

from __future__ import annotations

import base64
import queue
import shlex
import subprocess
import threading
import time
from typing import Sequence

from ..core import Detection, ImageBuffer
from ..errors import BackendTimeoutError, BackendUnavailableError, ProtocolViolationError
from ..imageproc import encode_png_bytes
from . import wire
from .base import DetectorBackendDescriptor
from .whitebox import WhiteBoxCapture, load_whitebox_capture

_EOF = object()

DEFAULT_TIMEOUT_S = 120.0


class SubprocessBackend:
    """Exclusively-owned handle to one child detector process.

    Requests and responses are matched by id, so the child may answer out
    of order within a batch. A batch that misses its deadline poisons the
    stream; the process is closed and the handle becomes unusable.
    """

    def __init__(self, cmd: str | Sequence[str], timeout_s: float = DEFAULT_TIMEOUT_S):
        argv = shlex.split(cmd) if isinstance(cmd, str) else list(cmd)
        self.timeout_s = timeout_s
        self._next_id = 0
        self._closed = False
        try:
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise BackendUnavailableError(f"could not start backend {argv!r}: {exc}") from exc
        self._lines: "queue.Queue[object]" = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()
        first = self._read_frame(timeout_s)
        self._descriptor = wire.parse_handshake(first)

    def _pump(self) -> None:
        assert self._proc.stdout is not None
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(_EOF)

    def _read_frame(self, timeout: float) -> dict:
        try:
            item = self._lines.get(timeout=timeout)
        except queue.Empty:
            self.close()
            raise BackendTimeoutError(f"backend sent nothing for {timeout:.0f}s") from None
        if item is _EOF:
            self.close()
            raise BackendUnavailableError("backend process closed its output")
        return wire.decode_frame(item)  # type: ignore[arg-type]

    def _send(self, frame: dict) -> None:
        if self._closed:
            raise BackendUnavailableError("backend handle is closed")
        assert self._proc.stdin is not None
        try:
            self._proc.stdin.write(wire.encode_frame(frame))
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            self.close()
            raise BackendUnavailableError(f"backend process is gone: {exc}") from exc

    def descriptor(self) -> DetectorBackendDescriptor:
        return self._descriptor

    def detect_batch(self, images: Sequence[ImageBuffer]) -> list[list[Detection]]:
        if len(images) > self._descriptor.max_batch:
            raise ValueError(f"batch of {len(images)} exceeds max_batch {self._descriptor.max_batch}")
        pending: dict[int, int] = {}
        for position, image in enumerate(images):
            request_id = self._next_id
            self._next_id += 1
            png_b64 = base64.b64encode(encode_png_bytes(image)).decode("ascii")
            self._send(wire.detect_request(request_id, png_b64))
            pending[request_id] = position
        results: list[list[Detection] | None] = [None] * len(images)
        deadline = time.monotonic() + self.timeout_s
        while pending:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                self.close()
                raise BackendTimeoutError(f"batch of {len(images)} timed out after {self.timeout_s:.0f}s")
            frame = self._read_frame(remaining)
            request_id, detections, _timing = wire.parse_detect_response(frame)
            if request_id not in pending:
                raise ProtocolViolationError(f"response for unknown request id {request_id}")
            results[pending.pop(request_id)] = detections
        return results  # type: ignore[return-value]

    def capture(self, image: ImageBuffer, layer: str, target_index: int) -> WhiteBoxCapture:
        if not self._descriptor.supports_whitebox:
            raise BackendUnavailableError(f"backend {self._descriptor.name!r} has no white-box support")
        request_id = self._next_id
        self._next_id += 1
        png_b64 = base64.b64encode(encode_png_bytes(image)).decode("ascii")
        self._send(wire.capture_request(request_id, png_b64, layer, target_index))
        frame = self._read_frame(self.timeout_s)
        if frame.get("id") != request_id:
            raise ProtocolViolationError(f"capture response echoed id {frame.get('id')!r}")
        if "error" in frame:
            raise ProtocolViolationError(f"backend answered with error: {frame['error']!r}")
        path = frame.get("capture_path")
        if not isinstance(path, str):
            raise ProtocolViolationError("capture response missing capture_path")
        return load_whitebox_capture(path, layer_id=layer)

    def close(self) -> None:
        if self._closed:
            return
        self._closed = True
        try:
            if self._proc.stdin is not None:
                self._proc.stdin.close()
        except OSError:
            pass
        try:
            self._proc.terminate()
            self._proc.wait(timeout=5)
        except (OSError, subprocess.TimeoutExpired):
            self._proc.kill()
