"""Saliency-map explainers for object detections, plus result persistence."""

from .config import (
    ExplainerConfig,
    ExplanationResult,
    FusionMode,
    Method,
    TargetSpec,
    config_digest,
    load_pgm,
    load_saliency,
    save_explanation,
    save_pgm16,
)
from .dclose import explain_dclose, segment_mask_array
from .drise import drise_similarity, explain_drise
from .gcame import explain_gcame, gaussian_kernel
from .masks import generate_rise_masks, rise_mask_array


def explain(backend, image, target, cfg, *, capture=None, workers: int = 1) -> ExplanationResult:
    """Dispatch to the configured method.

    Gradient-based explanation needs a white-box ``capture``; the two
    perturbation methods need a live ``backend``.
    """
    if cfg.method is Method.DRISE:
        return explain_drise(backend, image, target, cfg, workers=workers)
    if cfg.method is Method.DCLOSE:
        return explain_dclose(backend, image, target, cfg, workers=workers)
    if capture is None:
        raise ValueError("gradient-based explanation requires a white-box capture")
    return explain_gcame(capture, (image.width, image.height), target, cfg)


__all__ = [
    "ExplainerConfig",
    "ExplanationResult",
    "FusionMode",
    "Method",
    "TargetSpec",
    "config_digest",
    "drise_similarity",
    "explain",
    "explain_dclose",
    "explain_drise",
    "explain_gcame",
    "gaussian_kernel",
    "generate_rise_masks",
    "load_pgm",
    "load_saliency",
    "rise_mask_array",
    "save_explanation",
    "save_pgm16",
    "segment_mask_array",
]
