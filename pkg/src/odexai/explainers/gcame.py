"""Gradient-weighted feature-map explanation with Gaussian focusing.

Works from a pre-exported white-box capture (feature maps plus gradients
for one layer), so it needs no live model access: channels are weighted by
their mean gradient, split by weight sign, modulated by a Gaussian centered
on the target, and the rectified difference becomes the saliency map.
"""

from __future__ import annotations

import math
import time

import numpy as np

from ..core import SaliencyMap
from ..detectors.whitebox import WhiteBoxCapture
from ..errors import CaptureMismatchError
from ..imageproc import bilinear_at, normalize_array
from .config import ExplainerConfig, ExplanationResult, Method, TargetSpec, config_digest


def gaussian_kernel(center: tuple[float, float], sigma: float, w: int, h: int) -> np.ndarray:
    """Radially symmetric kernel (2*pi*sigma^2)^-1 * exp(-d^2 / (2*sigma^2))."""
    if not sigma > 0:
        raise ValueError("sigma must be > 0")
    cx, cy = center
    dx2 = (np.arange(w, dtype=np.float64) - cx) ** 2
    dy2 = (np.arange(h, dtype=np.float64) - cy) ** 2
    d2 = dy2[:, None] + dx2[None, :]
    return np.exp(-d2 / (2.0 * sigma * sigma)) / (2.0 * math.pi * sigma * sigma)


def gcame_raw_map(capture: WhiteBoxCapture, target: TargetSpec, sigma_scale: float) -> np.ndarray:
    """Rectified weighted sum at feature resolution, before any normalization."""
    _, fh, fw = capture.feature_maps.shape
    fx = capture.target_center[0] / capture.stride
    fy = capture.target_center[1] / capture.stride
    if not (0.0 <= fx < fw and 0.0 <= fy < fh):
        raise CaptureMismatchError(
            f"stride {capture.stride} maps center {capture.target_center} to "
            f"({fx:.2f}, {fy:.2f}), outside the {fw}x{fh} feature grid"
        )
    box = target.detection.bbox
    sigma = sigma_scale * max(box.width, box.height) / capture.stride
    kernel = gaussian_kernel((fx, fy), sigma, fw, fh)

    alphas = capture.gradients.mean(axis=(1, 2))
    positive = alphas >= 0
    weighted = alphas[:, None, None] * capture.feature_maps
    boosting = weighted[positive].sum(axis=0) if positive.any() else 0.0
    suppressing = -weighted[~positive].sum(axis=0) if (~positive).any() else 0.0
    return np.maximum(0.0, kernel * (boosting - suppressing))


def explain_gcame(
    capture: WhiteBoxCapture,
    image_dims: tuple[int, int],
    target: TargetSpec,
    cfg: ExplainerConfig,
) -> ExplanationResult:
    if cfg.method is not Method.GCAME:
        raise ValueError(f"config method is {cfg.method}, expected {Method.GCAME}")
    start = time.perf_counter()
    width, height = image_dims
    raw = gcame_raw_map(capture, target, cfg.gcame_sigma_scale)
    # Image pixel (x, y) sits at feature coordinate (x/stride, y/stride),
    # the same convention that places the target center on the feature grid.
    full = bilinear_at(
        raw,
        np.arange(height, dtype=np.float64) / capture.stride,
        np.arange(width, dtype=np.float64) / capture.stride,
    )
    saliency = SaliencyMap(normalize_array(full))
    return ExplanationResult(saliency, time.perf_counter() - start, cfg.method, config_digest(cfg))
