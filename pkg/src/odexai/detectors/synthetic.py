"""Built-in synthetic blob detector: the desk-scale oracle backend.

A pixel belongs to class c (red, green, blue) when its c channel exceeds
0.8 and both other channels are below 0.2. Each 4-connected component of
at least 25 qualifying pixels becomes one detection whose class probability
and objectness degrade smoothly as pixels are masked away, which is what
makes deletion/insertion curves meaningful without a real model.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy import ndimage

from ..core import BBox, Detection, ImageBuffer
from .base import DetectorBackendDescriptor

CLASS_NAMES = ("red", "green", "blue")
MIN_BLOB_PIXELS = 25
SATURATION_PIXELS = 500
CHANNEL_HIGH = 0.8
CHANNEL_LOW = 0.2

_CROSS = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])


def synthetic_detect(image: ImageBuffer) -> list[Detection]:
    """Deterministic, stateless detection; a pure function of pixel values."""
    pix = image.pixels
    detections: list[Detection] = []
    for c in range(3):
        others = [j for j in range(3) if j != c]
        qualifying = (
            (pix[:, :, c] > CHANNEL_HIGH)
            & (pix[:, :, others[0]] < CHANNEL_LOW)
            & (pix[:, :, others[1]] < CHANNEL_LOW)
        )
        if not qualifying.any():
            continue
        components, n_comp = ndimage.label(qualifying, structure=_CROSS)
        counts = np.bincount(components.ravel(), minlength=n_comp + 1)
        for comp_id, bounds in enumerate(ndimage.find_objects(components), start=1):
            if bounds is None or counts[comp_id] < MIN_BLOB_PIXELS:
                continue
            rows, cols = bounds
            bbox = BBox(float(cols.start), float(rows.start), float(cols.stop), float(rows.stop))
            count = float(counts[comp_id])
            prob = min(1.0, count / bbox.area)
            probs = np.full(3, (1.0 - prob) / 2.0)
            probs[c] = prob
            detections.append(Detection(bbox, min(1.0, count / SATURATION_PIXELS), probs))
    return detections


class SyntheticBackend:
    """Stateless in-process backend; freely shareable across threads."""

    def __init__(self, max_batch: int = 64):
        self._descriptor = DetectorBackendDescriptor(
            name="synthetic",
            class_names=CLASS_NAMES,
            max_batch=max_batch,
            supports_whitebox=False,
        )

    def descriptor(self) -> DetectorBackendDescriptor:
        return self._descriptor

    def detect_batch(self, images: Sequence[ImageBuffer]) -> list[list[Detection]]:
        return [synthetic_detect(image) for image in images]

    def close(self) -> None:
        pass
