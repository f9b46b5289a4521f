"""Black-box explanation via randomized masking of the detector input.

Each random mask is scored by how well the best detection on the masked
image matches the target (box overlap x class-vector cosine x objectness);
the saliency map is the score-weighted sum of the masks.
"""

from __future__ import annotations

import time

import numpy as np

from ..core import Detection, SaliencyMap, cosine_sim, iou
from ..errors import ZeroVectorError
from ..imageproc import normalize_array
from .config import ExplainerConfig, ExplanationResult, Method, TargetSpec, config_digest
from .masks import rise_mask_array
from .runner import masked_weights, run_chunks
from ..detectors.base import ensure_pool


def drise_similarity(target: Detection, proposal: Detection) -> float:
    """Product of spatial, classification, and objectness agreement, in [0, 1].

    Negative cosine similarity clamps to 0: mask weights must stay
    non-negative for aggregation. A zero-norm class vector counts as 0.
    """
    spatial = iou(target.bbox, proposal.bbox)
    if spatial == 0.0:
        return 0.0
    try:
        consistency = max(0.0, cosine_sim(target.class_probs, proposal.class_probs))
    except ZeroVectorError:
        consistency = 0.0
    return spatial * consistency * proposal.objectness


def explain_drise(
    backend,
    image,
    target: TargetSpec,
    cfg: ExplainerConfig,
    *,
    workers: int = 1,
) -> ExplanationResult:
    if cfg.method is not Method.DRISE:
        raise ValueError(f"config method is {cfg.method}, expected {Method.DRISE}")
    start = time.perf_counter()
    pool = ensure_pool(backend)
    h, w = image.height, image.width
    baseline = np.zeros_like(image.pixels)

    def chunk(lo: int, hi: int) -> np.ndarray:
        masks = [
            rise_mask_array(cfg.rng_seed, i, cfg.rise_grid, cfg.rise_p, w, h)
            for i in range(lo, hi)
        ]
        weights = masked_weights(pool, image.pixels, baseline, masks, target.detection, drise_similarity)
        return (weights[:, None, None] * np.stack(masks)).sum(axis=0)

    partials = run_chunks(cfg.n_masks, workers, chunk)
    total = partials[0]
    for partial in partials[1:]:
        total = total + partial
    saliency = SaliencyMap(normalize_array(total))
    return ExplanationResult(saliency, time.perf_counter() - start, cfg.method, config_digest(cfg))
