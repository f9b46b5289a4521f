"""Shared machinery for perturbation explainers: chunked, order-stable evaluation.

Masked-inference chunks may run on any number of workers; partial sums are
combined in chunk order with a fixed chunk size, so the final map is
bit-identical regardless of scheduling.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

from ..core import Detection, ImageBuffer
from ..detectors.base import BackendPool, detect
from ..imageproc import apply_mask_array

T = TypeVar("T")

CHUNK_SIZE = 64


def run_chunks(
    n_items: int,
    workers: int,
    fn: Callable[[int, int], T],
    chunk_size: int = CHUNK_SIZE,
) -> list[T]:
    """Apply fn(lo, hi) over fixed-size chunks; results come back in chunk order."""
    bounds = [(lo, min(lo + chunk_size, n_items)) for lo in range(0, n_items, chunk_size)]
    if workers <= 1 or len(bounds) <= 1:
        return [fn(lo, hi) for lo, hi in bounds]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(fn, lo, hi) for lo, hi in bounds]
        return [f.result() for f in futures]


def masked_weights(
    pool: BackendPool,
    image_pixels: np.ndarray,
    baseline_pixels: np.ndarray,
    masks: Sequence[np.ndarray],
    target: Detection,
    similarity: Callable[[Detection, Detection], float],
) -> np.ndarray:
    """Score each mask by the best-matching proposal on the masked image."""
    images = [ImageBuffer(apply_mask_array(image_pixels, m, baseline_pixels)) for m in masks]
    with pool.acquire() as backend:
        detection_lists = detect(backend, images)
    return np.array(
        [max((similarity(target, d) for d in dl), default=0.0) for dl in detection_lists]
    )
