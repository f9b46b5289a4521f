"""HTTP backend: wire-protocol frames carried over plain HTTP POSTs.

GET <url> returns the handshake frame; POST <url> with one request frame
returns the matching response frame.
"""

from __future__ import annotations

import base64
import socket
import urllib.error
import urllib.request
from typing import Sequence

from ..core import Detection, ImageBuffer
from ..errors import BackendTimeoutError, BackendUnavailableError, ProtocolViolationError
from ..imageproc import encode_png_bytes
from . import wire
from .base import DetectorBackendDescriptor


class HttpBackend:
    def __init__(self, url: str, timeout_s: float = 120.0):
        self.url = url
        self.timeout_s = timeout_s
        self._next_id = 0
        self._descriptor = wire.parse_handshake(self._get())

    def _get(self) -> dict:
        try:
            with urllib.request.urlopen(self.url, timeout=self.timeout_s) as response:
                body = response.read()
        except socket.timeout as exc:
            raise BackendTimeoutError(f"handshake to {self.url} timed out") from exc
        except (urllib.error.URLError, OSError) as exc:
            raise BackendUnavailableError(f"cannot reach backend at {self.url}: {exc}") from exc
        return wire.decode_frame(body.decode("utf-8"))

    def _post(self, frame: dict) -> dict:
        request = urllib.request.Request(
            self.url,
            data=wire.encode_frame(frame).encode("utf-8"),
            headers={"Content-Type": "application/json"},
            method="POST",
        )
        try:
            with urllib.request.urlopen(request, timeout=self.timeout_s) as response:
                body = response.read()
        except socket.timeout as exc:
            raise BackendTimeoutError(f"request to {self.url} timed out") from exc
        except (urllib.error.URLError, OSError) as exc:
            raise BackendUnavailableError(f"cannot reach backend at {self.url}: {exc}") from exc
        return wire.decode_frame(body.decode("utf-8"))

    def descriptor(self) -> DetectorBackendDescriptor:
        return self._descriptor

    def detect_batch(self, images: Sequence[ImageBuffer]) -> list[list[Detection]]:
        results: list[list[Detection]] = []
        for image in images:
            request_id = self._next_id
            self._next_id += 1
            png_b64 = base64.b64encode(encode_png_bytes(image)).decode("ascii")
            frame = self._post(wire.detect_request(request_id, png_b64))
            echoed, detections, _timing = wire.parse_detect_response(frame)
            if echoed != request_id:
                raise ProtocolViolationError(f"response echoed id {echoed}, expected {request_id}")
            results.append(detections)
        return results

    def close(self) -> None:
        pass
