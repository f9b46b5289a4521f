"""Wire protocol v1: newline-delimited JSON frames over stdin/stdout.

Frames:
  handshake  {"odexai_proto": 1, "name", "classes", "max_batch", "supports_whitebox"}
  request    {"id", "op": "detect", "image_png_b64"}
             {"id", "op": "capture", "image_png_b64", "layer", "target_index"}
  response   {"id", "detections": [...], "timing_ms"}
             {"id", "capture_path"}
             {"id", "error"}
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from ..core import BBox, Detection
from ..errors import ProtocolViolationError
from .base import DetectorBackendDescriptor

PROTO_VERSION = 1


def encode_frame(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def decode_frame(line: str) -> dict:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolViolationError(f"frame is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ProtocolViolationError(f"frame must be a JSON object, got {type(obj).__name__}")
    return obj


def handshake_frame(descriptor: DetectorBackendDescriptor) -> dict:
    return {
        "odexai_proto": PROTO_VERSION,
        "name": descriptor.name,
        "classes": list(descriptor.class_names),
        "max_batch": descriptor.max_batch,
        "supports_whitebox": descriptor.supports_whitebox,
    }


def parse_handshake(obj: dict) -> DetectorBackendDescriptor:
    if obj.get("odexai_proto") != PROTO_VERSION:
        raise ProtocolViolationError(f"unsupported protocol version: {obj.get('odexai_proto')!r}")
    try:
        name = obj["name"]
        classes = obj["classes"]
        max_batch = obj["max_batch"]
        supports_whitebox = obj["supports_whitebox"]
    except KeyError as exc:
        raise ProtocolViolationError(f"handshake missing field {exc}") from exc
    if (
        not isinstance(name, str)
        or not isinstance(classes, list)
        or not all(isinstance(c, str) for c in classes)
        or not isinstance(max_batch, int)
        or isinstance(max_batch, bool)
        or not isinstance(supports_whitebox, bool)
    ):
        raise ProtocolViolationError("handshake field has wrong type")
    try:
        return DetectorBackendDescriptor(name, tuple(classes), max_batch, supports_whitebox)
    except ValueError as exc:
        raise ProtocolViolationError(str(exc)) from exc


def detect_request(request_id: int, image_png_b64: str) -> dict:
    return {"id": request_id, "op": "detect", "image_png_b64": image_png_b64}


def capture_request(request_id: int, image_png_b64: str, layer: str, target_index: int) -> dict:
    return {
        "id": request_id,
        "op": "capture",
        "image_png_b64": image_png_b64,
        "layer": layer,
        "target_index": target_index,
    }


def detection_to_wire(det: Detection) -> dict:
    return {
        "bbox": [det.bbox.x1, det.bbox.y1, det.bbox.x2, det.bbox.y2],
        "objectness": float(det.objectness),
        "class_probs": [float(p) for p in det.class_probs],
    }


def detection_from_wire(obj: Any) -> Detection:
    if not isinstance(obj, dict):
        raise ProtocolViolationError("detection must be a JSON object")
    try:
        bbox = obj["bbox"]
        objectness = obj["objectness"]
        class_probs = obj["class_probs"]
    except KeyError as exc:
        raise ProtocolViolationError(f"detection missing field {exc}") from exc
    if (
        not isinstance(bbox, list)
        or len(bbox) != 4
        or not all(isinstance(v, (int, float)) for v in bbox)
        or not isinstance(objectness, (int, float))
        or not isinstance(class_probs, list)
        or not class_probs
        or not all(isinstance(p, (int, float)) for p in class_probs)
    ):
        raise ProtocolViolationError("detection field has wrong shape")
    try:
        return Detection(
            BBox(float(bbox[0]), float(bbox[1]), float(bbox[2]), float(bbox[3])),
            float(objectness),
            np.array(class_probs, dtype=np.float64),
        )
    except ValueError as exc:
        raise ProtocolViolationError(str(exc)) from exc


def detect_response(request_id: int, detections: list[Detection], timing_ms: float) -> dict:
    return {
        "id": request_id,
        "detections": [detection_to_wire(d) for d in detections],
        "timing_ms": float(timing_ms),
    }


def parse_detect_response(obj: dict) -> tuple[int, list[Detection], float]:
    request_id = obj.get("id")
    if not isinstance(request_id, int) or isinstance(request_id, bool):
        raise ProtocolViolationError("response must echo an integer request id")
    if "error" in obj:
        raise ProtocolViolationError(f"backend answered with error: {obj['error']!r}")
    detections = obj.get("detections")
    if not isinstance(detections, list):
        raise ProtocolViolationError("response missing detections list")
    timing_ms = obj.get("timing_ms", 0.0)
    if not isinstance(timing_ms, (int, float)):
        raise ProtocolViolationError("timing_ms must be a number")
    return request_id, [detection_from_wire(d) for d in detections], float(timing_ms)
