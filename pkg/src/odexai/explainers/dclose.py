"""Segment-based explanation over multiple superpixel granularities.

Each level segments the image into a different number of superpixels,
draws masks by keeping each segment with probability 1/2, scores them like
the randomized-mask explainer, and normalizes the weighted sum by a density
map (how often each pixel stayed visible). Level maps are then fused from
the finest granularity to the coarsest.
"""

from __future__ import annotations

import time

import numpy as np

from ..core import SaliencyMap
from ..detectors.base import ensure_pool
from ..imageproc import normalize_array, slic_segment
from ..rng import DOMAIN_SEGMENT_MASK, stream_rng
from .config import ExplainerConfig, ExplanationResult, FusionMode, Method, TargetSpec, config_digest
from .drise import drise_similarity
from .runner import masked_weights, run_chunks

KEEP_PROBABILITY = 0.5


def segment_mask_array(
    seed: int, level_index: int, mask_index: int, labels: np.ndarray, segment_count: int
) -> np.ndarray:
    rng = stream_rng(seed, DOMAIN_SEGMENT_MASK, level_index, mask_index)
    keep = rng.random(segment_count) < KEEP_PROBABILITY
    return keep[labels].astype(np.float64)


def explain_dclose(
    backend,
    image,
    target: TargetSpec,
    cfg: ExplainerConfig,
    *,
    workers: int = 1,
) -> ExplanationResult:
    if cfg.method is not Method.DCLOSE:
        raise ValueError(f"config method is {cfg.method}, expected {Method.DCLOSE}")
    start = time.perf_counter()
    pool = ensure_pool(backend)
    baseline = np.zeros_like(image.pixels)
    masks_per_level = cfg.n_masks // len(cfg.dclose_levels)
    if masks_per_level < 1:
        raise ValueError(
            f"n_masks={cfg.n_masks} spreads below one mask per level over "
            f"{len(cfg.dclose_levels)} levels"
        )

    level_maps: dict[int, np.ndarray] = {}
    for level_index, n_segments in enumerate(cfg.dclose_levels):
        segmentation = slic_segment(image, n_segments)
        labels = segmentation.labels
        count = segmentation.segment_count

        def chunk(lo: int, hi: int) -> tuple[np.ndarray, np.ndarray]:
            masks = [
                segment_mask_array(cfg.rng_seed, level_index, i, labels, count)
                for i in range(lo, hi)
            ]
            weights = masked_weights(
                pool, image.pixels, baseline, masks, target.detection, drise_similarity
            )
            stack = np.stack(masks)
            return (weights[:, None, None] * stack).sum(axis=0), stack.sum(axis=0)

        partials = run_chunks(masks_per_level, workers, chunk)
        numerator, density = partials[0]
        for num, den in partials[1:]:
            numerator = numerator + num
            density = density + den
        # Pixels never kept by any mask get saliency 0, not 0/0.
        level_map = np.divide(
            numerator, density, out=np.zeros_like(numerator), where=density > 0
        )
        level_maps[n_segments] = normalize_array(level_map)

    fused = _fuse(level_maps, cfg.dclose_fusion)
    saliency = SaliencyMap(normalize_array(fused))
    return ExplanationResult(saliency, time.perf_counter() - start, cfg.method, config_digest(cfg))


def _fuse(level_maps: dict[int, np.ndarray], mode: FusionMode) -> np.ndarray:
    # Finest granularity = most segments.
    ordered = [level_maps[n] for n in sorted(level_maps, reverse=True)]
    if mode is FusionMode.MEAN:
        return np.mean(ordered, axis=0)
    fused = ordered[0]
    for level_map in ordered[1:]:
        fused = (fused + level_map) / 2.0
    return fused
