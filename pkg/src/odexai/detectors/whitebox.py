"""White-box captures and the ODT tensor-bundle format.

An ODT bundle (binary, little-endian) stores named f32 tensors:
magic "ODT1", u32 tensor_count, then per tensor u32 name_len, name bytes,
u32 rank, u32 dims[rank], f32 data. Captures require "features" (K, h, w),
"gradients" (K, h, w), "stride" (scalar), and "center" (2,).
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import FormatError, NonFiniteTensorError

MAGIC = b"ODT1"
_MAX_RANK = 8


@dataclass(frozen=True)
class WhiteBoxCapture:
    """Feature maps and gradients for one target layer of one detection."""

    layer_id: str
    feature_maps: np.ndarray
    gradients: np.ndarray
    stride: float
    target_center: tuple[float, float]

    def __post_init__(self) -> None:
        features = np.array(self.feature_maps, dtype=np.float64, copy=True)
        gradients = np.array(self.gradients, dtype=np.float64, copy=True)
        if features.ndim != 3 or features.shape != gradients.shape:
            raise ValueError(
                f"features {features.shape} and gradients {gradients.shape} "
                "must share one (K, h, w) shape"
            )
        if not (np.all(np.isfinite(features)) and np.all(np.isfinite(gradients))):
            raise NonFiniteTensorError("capture tensors contain NaN/Inf")
        if not (math.isfinite(self.stride) and self.stride > 0):
            raise ValueError(f"stride must be positive, got {self.stride}")
        for axis in self.target_center:
            if not math.isfinite(axis):
                raise ValueError("target_center must be finite")
        features.setflags(write=False)
        gradients.setflags(write=False)
        object.__setattr__(self, "feature_maps", features)
        object.__setattr__(self, "gradients", gradients)
        object.__setattr__(self, "target_center", (float(self.target_center[0]), float(self.target_center[1])))


def write_odt(path, tensors: dict[str, np.ndarray]) -> None:
    chunks = [MAGIC, struct.pack("<I", len(tensors))]
    for name, tensor in tensors.items():
        arr = np.asarray(tensor, dtype="<f4")
        encoded = name.encode("utf-8")
        chunks.append(struct.pack("<I", len(encoded)))
        chunks.append(encoded)
        chunks.append(struct.pack("<I", arr.ndim))
        chunks.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        chunks.append(arr.tobytes(order="C"))
    Path(path).write_bytes(b"".join(chunks))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError(f"bundle truncated at byte {self.pos} (need {n} more)")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]


def read_odt(path) -> dict[str, np.ndarray]:
    reader = _Reader(Path(path).read_bytes())
    if reader.take(4) != MAGIC:
        raise FormatError("bad magic; not an ODT bundle")
    tensors: dict[str, np.ndarray] = {}
    for _ in range(reader.u32()):
        name = reader.take(reader.u32()).decode("utf-8", errors="replace")
        rank = reader.u32()
        if rank > _MAX_RANK:
            raise FormatError(f"tensor {name!r} has implausible rank {rank}")
        dims = tuple(reader.u32() for _ in range(rank))
        count = 1
        for d in dims:
            count *= d
        raw = reader.take(4 * count)
        tensors[name] = np.frombuffer(raw, dtype="<f4").reshape(dims).astype(np.float64)
    if reader.pos != len(reader.data):
        raise FormatError(f"{len(reader.data) - reader.pos} trailing bytes after last tensor")
    return tensors


def load_whitebox_capture(path, layer_id: str = "") -> WhiteBoxCapture:
    tensors = read_odt(path)
    for required in ("features", "gradients", "stride", "center"):
        if required not in tensors:
            raise FormatError(f"bundle missing required tensor {required!r}")
    features = tensors["features"]
    gradients = tensors["gradients"]
    stride = tensors["stride"]
    center = tensors["center"]
    if features.ndim != 3:
        raise FormatError(f"features must be rank 3 (K, h, w), got rank {features.ndim}")
    if gradients.shape != features.shape:
        raise FormatError(
            f"gradients shape {gradients.shape} does not match features {features.shape}"
        )
    if stride.size != 1:
        raise FormatError("stride must be a scalar")
    if center.size != 2:
        raise FormatError("center must hold exactly (cx, cy)")
    for name, tensor in tensors.items():
        if not np.all(np.isfinite(tensor)):
            raise NonFiniteTensorError(f"tensor {name!r} contains NaN/Inf")
    stride_value = float(stride.reshape(-1)[0])
    if stride_value <= 0:
        raise FormatError(f"stride must be positive, got {stride_value}")
    cx, cy = (float(v) for v in center.reshape(-1))
    return WhiteBoxCapture(layer_id, features, gradients, stride_value, (cx, cy))


def write_whitebox_capture(path, capture: WhiteBoxCapture) -> None:
    write_odt(
        path,
        {
            "features": capture.feature_maps,
            "gradients": capture.gradients,
            "stride": np.array(capture.stride),
            "center": np.array(capture.target_center),
        },
    )
