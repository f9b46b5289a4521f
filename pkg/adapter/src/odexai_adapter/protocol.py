"""The line-JSON protocol loop: handshake, then detect/capture requests."""

from __future__ import annotations

import base64
import io
import json
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
from PIL import Image

from .models import AdapterConfig, UnknownLayerError, build_model
from .odt import capture_bundle, write_odt

PROTO_VERSION = 1


def decode_image(image_png_b64: str) -> np.ndarray:
    raw = base64.b64decode(image_png_b64)
    with Image.open(io.BytesIO(raw)) as img:
        return np.asarray(img.convert("RGB"), dtype=np.float64) / 255.0


def _send(obj: dict, out) -> None:
    out.write(json.dumps(obj) + "\n")
    out.flush()


def serve(config: AdapterConfig, stdin=None, stdout=None, capture_dir=None) -> None:
    """Answer protocol frames until stdin closes; exits nonzero on load failure."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    try:
        model = build_model(config)
    except Exception as exc:  # noqa: BLE001 - load failures must exit nonzero
        print(f"model load failed: {exc}", file=sys.stderr)
        raise SystemExit(2) from exc
    capture_dir = Path(capture_dir) if capture_dir else Path(tempfile.mkdtemp(prefix="odexai_capture_"))
    capture_dir.mkdir(parents=True, exist_ok=True)

    _send(
        {
            "odexai_proto": PROTO_VERSION,
            "name": config.model,
            "classes": list(model.class_names),
            "max_batch": config.max_batch,
            "supports_whitebox": True,
        },
        stdout,
    )

    for line in stdin:
        if not line.strip():
            continue
        try:
            request = json.loads(line)
            request_id = int(request["id"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            _send({"id": -1, "error": f"unreadable request: {exc}"}, stdout)
            continue
        try:
            op = request.get("op")
            if op == "detect":
                started = time.perf_counter()
                pixels = decode_image(request["image_png_b64"])
                detections = model.detect(pixels)
                _send(
                    {
                        "id": request_id,
                        "detections": detections,
                        "timing_ms": (time.perf_counter() - started) * 1000.0,
                    },
                    stdout,
                )
            elif op == "capture":
                pixels = decode_image(request["image_png_b64"])
                features, gradients, stride, center = model.capture(
                    pixels, request.get("layer", ""), int(request.get("target_index", 0))
                )
                path = capture_dir / f"capture_{request_id}.odt"
                write_odt(path, capture_bundle(features, gradients, stride, center))
                _send({"id": request_id, "capture_path": str(path)}, stdout)
            else:
                _send({"id": request_id, "error": f"unknown op {op!r}"}, stdout)
        except (KeyError, ValueError, IndexError, UnknownLayerError) as exc:
            _send({"id": request_id, "error": f"{type(exc).__name__}: {exc}"}, stdout)
