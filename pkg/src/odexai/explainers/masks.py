"""Randomized low-resolution masks, upsampled with a random sub-cell shift."""

from __future__ import annotations

import math

import numpy as np

from ..imageproc import BinaryMaskGrid, bilinear_sample_array
from ..rng import DOMAIN_RISE_MASK, stream_rng


def rise_mask_array(seed: int, index: int, grid: int, p: float, out_w: int, out_h: int) -> np.ndarray:
    """Mask ``index`` of the stream keyed by ``seed``: reproducible in isolation.

    Draw order within the stream is fixed: the g x g Bernoulli(p) grid,
    then shift_x, then shift_y. The grid is upsampled to (out + cell) per
    axis and cropped at the shifted origin, the RISE convention.
    """
    rng = stream_rng(seed, DOMAIN_RISE_MASK, index)
    cells = rng.random((grid, grid)) < p
    cell_w = math.ceil(out_w / grid)
    cell_h = math.ceil(out_h / grid)
    shift_x = rng.random() * cell_w
    shift_y = rng.random() * cell_h
    up = bilinear_sample_array(
        cells.astype(np.float64), out_w + cell_w, out_h + cell_h, shift_x, shift_y
    )
    return np.clip(up[:out_h, :out_w], 0.0, 1.0)


def generate_rise_masks(
    seed: int, n: int, grid: int, p: float, out_w: int, out_h: int
) -> list[BinaryMaskGrid]:
    if grid < 2:
        raise ValueError("grid must be >= 2")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    return [BinaryMaskGrid(rise_mask_array(seed, i, grid, p, out_w, out_h)) for i in range(n)]
