"""ODT tensor-bundle writer (little-endian, f32).

Layout: magic "ODT1", u32 tensor_count, then per tensor u32 name_len,
name bytes, u32 rank, u32 dims[rank], f32 data.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"ODT1"


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


def capture_bundle(
    features: np.ndarray, gradients: np.ndarray, stride: float, center: tuple[float, float]
) -> dict[str, np.ndarray]:
    features = np.asarray(features, dtype=np.float32)
    gradients = np.asarray(gradients, dtype=np.float32)
    if features.ndim != 3 or features.shape != gradients.shape:
        raise ValueError(
            f"features {features.shape} and gradients {gradients.shape} must share (K, h, w)"
        )
    return {
        "features": features,
        "gradients": gradients,
        "stride": np.array(stride, dtype=np.float32),
        "center": np.array(center, dtype=np.float32),
    }
