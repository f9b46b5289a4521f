"""Domain types shared by all modules, plus box/vector geometry primitives."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .errors import ZeroVectorError


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box in pixel coordinates, origin top-left.

    Corners are continuous: the box spans [x1, x2) x [y1, y2), so a solid
    w x h pixel blob has area w * h with no off-by-one ambiguity.
    """

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self) -> None:
        coords = (self.x1, self.y1, self.x2, self.y2)
        if not all(math.isfinite(c) for c in coords):
            raise ValueError(f"box coordinates must be finite, got {coords}")
        if min(coords) < 0:
            raise ValueError(f"box coordinates must be non-negative, got {coords}")
        if not (self.x2 > self.x1 and self.y2 > self.y1):
            raise ValueError(f"box must have positive extent, got {coords}")

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> tuple[float, float]:
        return (self.x1 + self.x2) / 2.0, (self.y1 + self.y2) / 2.0

    def as_tuple(self) -> tuple[float, float, float, float]:
        return self.x1, self.y1, self.x2, self.y2

    def contains_pixel(self, row: int, col: int) -> bool:
        """Pixel-center rule: (row, col) is inside iff its center (col+0.5, row+0.5) is."""
        return (self.x1 <= col + 0.5 < self.x2) and (self.y1 <= row + 0.5 < self.y2)

    def pixel_mask(self, width: int, height: int) -> np.ndarray:
        """Boolean (height, width) grid of pixels inside the box, pixel-center rule."""
        cols = np.arange(width) + 0.5
        rows = np.arange(height) + 0.5
        in_x = (cols >= self.x1) & (cols < self.x2)
        in_y = (rows >= self.y1) & (rows < self.y2)
        return in_y[:, None] & in_x[None, :]


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Detection:
    """One detector output: box, objectness, and the full class-probability vector.

    ``label`` is derived as the argmax of ``class_probs``.
    """

    bbox: BBox
    objectness: float
    class_probs: np.ndarray
    label: int = field(init=False)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Detection):
            return NotImplemented
        return (
            self.bbox == other.bbox
            and self.objectness == other.objectness
            and np.array_equal(self.class_probs, other.class_probs)
        )

    def __post_init__(self) -> None:
        probs = _readonly(np.atleast_1d(self.class_probs))
        if probs.ndim != 1 or probs.size == 0:
            raise ValueError("class_probs must be a non-empty 1-d vector")
        if not np.all(np.isfinite(probs)):
            raise ValueError("class_probs must be finite")
        if probs.min() < 0.0 or probs.max() > 1.0:
            raise ValueError("class_probs entries must lie in [0, 1]")
        if not (math.isfinite(self.objectness) and 0.0 <= self.objectness <= 1.0):
            raise ValueError(f"objectness must lie in [0, 1], got {self.objectness}")
        object.__setattr__(self, "class_probs", probs)
        object.__setattr__(self, "label", int(np.argmax(probs)))


@dataclass(frozen=True)
class SaliencyMap:
    """H x W grid of finite real relevance values, row-major."""

    values: np.ndarray

    def __post_init__(self) -> None:
        values = _readonly(self.values)
        if values.ndim != 2 or values.size == 0:
            raise ValueError("saliency values must form a non-empty 2-d grid")
        if not np.all(np.isfinite(values)):
            raise ValueError("saliency values must be finite (no NaN/Inf)")
        object.__setattr__(self, "values", values)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class GroundTruthInstance:
    """One annotated object: box, class index, and an opaque instance id."""

    bbox: BBox
    label: int
    instance_id: str
    meta: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.label < 0:
            raise ValueError("label must be a non-negative class index")
        object.__setattr__(self, "meta", MappingProxyType(dict(self.meta)))


@dataclass(frozen=True)
class ImageBuffer:
    """RGB image as an (H, W, 3) grid of channel values in [0, 1]."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        pixels = _readonly(self.pixels)
        if pixels.ndim != 3 or pixels.shape[2] != 3 or pixels.shape[0] == 0 or pixels.shape[1] == 0:
            raise ValueError("pixels must have shape (H, W, 3) with H, W > 0")
        if not np.all(np.isfinite(pixels)):
            raise ValueError("pixel values must be finite")
        if pixels.min() < 0.0 or pixels.max() > 1.0:
            raise ValueError("pixel values must lie in [0, 1]")
        object.__setattr__(self, "pixels", pixels)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union of two boxes, using continuous areas."""
    ix = min(a.x2, b.x2) - max(a.x1, b.x1)
    iy = min(a.y2, b.y2) - max(a.y1, b.y1)
    if ix <= 0.0 or iy <= 0.0:
        return 0.0
    inter = ix * iy
    union = a.area + b.area - inter
    return inter / union


def cosine_sim(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity of two equal-length vectors.

    Raises ZeroVectorError when either vector has zero norm; callers that
    use the value as a weight treat that case as similarity 0.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"vector lengths differ: {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise ZeroVectorError("cosine similarity undefined for a zero vector")
    return float(np.dot(u, v) / (nu * nv))
