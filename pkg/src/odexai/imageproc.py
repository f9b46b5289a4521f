"""Image-space primitives used by explainers and metrics.

Normalization, mask application, blur, mask upsampling, SLIC superpixel
segmentation, and PNG conversion (8-bit RGB <-> [0, 1] floats).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from PIL import Image
from scipy import ndimage

from .core import ImageBuffer, SaliencyMap
from .errors import DimensionMismatchError, TooManySegmentsError


@dataclass(frozen=True)
class BinaryMaskGrid:
    """Perturbation mask: (H, W) values in [0, 1], soft after upsampling."""

    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim != 2 or values.size == 0:
            raise ValueError("mask values must form a non-empty 2-d grid")
        if not np.all(np.isfinite(values)):
            raise ValueError("mask values must be finite")
        if values.min() < 0.0 or values.max() > 1.0:
            raise ValueError("mask values must lie in [0, 1]")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class SegmentLabelMap:
    """Superpixel assignment: (H, W) labels in [0, segment_count), each id used."""

    labels: np.ndarray
    segment_count: int

    def __post_init__(self) -> None:
        labels = np.array(self.labels, dtype=np.int32, copy=True)
        if labels.ndim != 2 or labels.size == 0:
            raise ValueError("labels must form a non-empty 2-d grid")
        if self.segment_count < 1:
            raise ValueError("segment_count must be positive")
        present = np.unique(labels)
        if present[0] < 0 or present[-1] >= self.segment_count:
            raise ValueError("labels must lie in [0, segment_count)")
        if present.size != self.segment_count:
            raise ValueError("every segment id must occur at least once")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]


# ---------------------------------------------------------------------------
# normalization and masking


def normalize_array(values: np.ndarray) -> np.ndarray:
    """Min-max normalize to [0, 1]; a constant grid maps to all ones.

    The constant rule encodes "no focus anywhere" as maximal density, which
    gives such maps the worst possible sparsity score instead of a 0/0.
    """
    values = np.asarray(values, dtype=np.float64)
    lo = values.min()
    hi = values.max()
    if hi == lo:
        return np.ones_like(values)
    return (values - lo) / (hi - lo)


def minmax_normalize(saliency: SaliencyMap) -> SaliencyMap:
    return SaliencyMap(normalize_array(saliency.values))


def apply_mask_array(image: np.ndarray, mask: np.ndarray, baseline: np.ndarray) -> np.ndarray:
    """Blend per channel: out = mask * image + (1 - mask) * baseline."""
    m = mask[:, :, None]
    return m * image + (1.0 - m) * baseline


def apply_mask(image: ImageBuffer, mask: BinaryMaskGrid, baseline: ImageBuffer) -> ImageBuffer:
    if (image.width, image.height) != (mask.width, mask.height) or (
        image.width,
        image.height,
    ) != (baseline.width, baseline.height):
        raise DimensionMismatchError(
            f"image {image.width}x{image.height}, mask {mask.width}x{mask.height}, "
            f"baseline {baseline.width}x{baseline.height} must all match"
        )
    return ImageBuffer(apply_mask_array(image.pixels, mask.values, baseline.pixels))


def black_baseline(width: int, height: int) -> ImageBuffer:
    return ImageBuffer(np.zeros((height, width, 3)))


# ---------------------------------------------------------------------------
# blur and upsampling


def gaussian_blur(image: ImageBuffer, sigma: float) -> ImageBuffer:
    """Separable Gaussian with kernel radius ceil(3*sigma), clamp-to-edge."""
    if not sigma > 0:
        raise ValueError("sigma must be > 0")
    radius = math.ceil(3.0 * sigma)
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(offsets**2) / (2.0 * sigma * sigma))
    kernel /= kernel.sum()
    out = image.pixels
    for axis in (0, 1):
        out = ndimage.correlate1d(out, kernel, axis=axis, mode="nearest")
    return ImageBuffer(np.clip(out, 0.0, 1.0))


def bilinear_at(grid: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Sample grid at the outer product of row coords u and column coords v,
    interpolating bilinearly and clamping at the border."""
    gh, gw = grid.shape
    u = np.clip(u, 0.0, gh - 1.0)
    v = np.clip(v, 0.0, gw - 1.0)
    u0 = np.minimum(u.astype(np.int64), gh - 2) if gh > 1 else np.zeros(u.size, dtype=np.int64)
    v0 = np.minimum(v.astype(np.int64), gw - 2) if gw > 1 else np.zeros(v.size, dtype=np.int64)
    u1 = np.minimum(u0 + 1, gh - 1)
    v1 = np.minimum(v0 + 1, gw - 1)
    fu = (u - u0)[:, None]
    fv = (v - v0)[None, :]
    g00 = grid[np.ix_(u0, v0)]
    g01 = grid[np.ix_(u0, v1)]
    g10 = grid[np.ix_(u1, v0)]
    g11 = grid[np.ix_(u1, v1)]
    top = g00 * (1.0 - fv) + g01 * fv
    bot = g10 * (1.0 - fv) + g11 * fv
    return top * (1.0 - fu) + bot * fu


def bilinear_sample_array(
    grid: np.ndarray, out_w: int, out_h: int, shift_x: float = 0.0, shift_y: float = 0.0
) -> np.ndarray:
    """Endpoint-aligned bilinear enlargement with a sub-cell sampling offset.

    With shift 0 the source values are recovered exactly at the sample
    centers; shifts move the sampling window by that many output pixels,
    clamping at the grid border.
    """
    gh, gw = grid.shape
    sy = (gh - 1) / (out_h - 1) if out_h > 1 else 0.0
    sx = (gw - 1) / (out_w - 1) if out_w > 1 else 0.0
    u = (np.arange(out_h) + shift_y) * sy
    v = (np.arange(out_w) + shift_x) * sx
    return bilinear_at(grid, u, v)


def bilinear_upsample(
    grid: BinaryMaskGrid, out_w: int, out_h: int, shift_x: float = 0.0, shift_y: float = 0.0
) -> BinaryMaskGrid:
    if out_w < grid.width or out_h < grid.height:
        raise ValueError("output must be at least as large as the source grid")
    if shift_x < 0 or shift_y < 0:
        raise ValueError("shifts must be non-negative")
    out = bilinear_sample_array(grid.values, out_w, out_h, shift_x, shift_y)
    # Interpolation of in-range values stays in range; clip float dust.
    return BinaryMaskGrid(np.clip(out, 0.0, 1.0))


# ---------------------------------------------------------------------------
# SLIC superpixels


def rgb_to_lab(pixels: np.ndarray) -> np.ndarray:
    """sRGB in [0, 1] to CIELAB (D65 white), shape-preserving."""
    srgb = np.asarray(pixels, dtype=np.float64)
    linear = np.where(srgb <= 0.04045, srgb / 12.92, ((srgb + 0.055) / 1.055) ** 2.4)
    m = np.array(
        [
            [0.4124564, 0.3575761, 0.1804375],
            [0.2126729, 0.7151522, 0.0721750],
            [0.0193339, 0.1191920, 0.9503041],
        ]
    )
    xyz = linear @ m.T
    white = np.array([0.95047, 1.0, 1.08883])
    t = xyz / white
    delta = 6.0 / 29.0
    f = np.where(t > delta**3, np.cbrt(t), t / (3.0 * delta * delta) + 4.0 / 29.0)
    lab = np.empty_like(f)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    return lab


def _segment_grid(n_segments: int, width: int, height: int) -> tuple[int, int]:
    """Pick a (cols, rows) seed grid whose product lands close to n_segments."""
    spacing = math.sqrt(width * height / n_segments)
    base_w = max(1, round(width / spacing))
    base_h = max(1, round(height / spacing))
    best = None
    for dw in range(-2, 4):
        for dh in range(-2, 4):
            gw, gh = base_w + dw, base_h + dh
            if gw < 1 or gh < 1 or gw > width or gh > height:
                continue
            cost = (abs(gw * gh - n_segments), abs(gw * height - gh * width), -gw)
            if best is None or cost < best[0]:
                best = (cost, gw, gh)
    assert best is not None
    return best[1], best[2]


def _fill_unassigned(final: np.ndarray) -> None:
    """Grow assigned regions one ring per round until no -1 pixels remain.

    Each orphan pixel adopts the label of a fixed-priority assigned
    neighbor (up, left, down, right), so grown segments stay 4-connected
    and the result is deterministic.
    """
    while (final < 0).any():
        cand = np.full_like(final, -1)
        for dy, dx in ((0, 1), (1, 0), (0, -1), (-1, 0)):  # reverse priority
            neighbor = np.full_like(final, -1)
            src_y = slice(max(dy, 0), final.shape[0] + min(dy, 0))
            dst_y = slice(max(-dy, 0), final.shape[0] + min(-dy, 0))
            src_x = slice(max(dx, 0), final.shape[1] + min(dx, 0))
            dst_x = slice(max(-dx, 0), final.shape[1] + min(-dx, 0))
            neighbor[dst_y, dst_x] = final[src_y, src_x]
            cand = np.where(neighbor >= 0, neighbor, cand)
        frontier = (final < 0) & (cand >= 0)
        if not frontier.any():  # pragma: no cover - cannot happen on a connected grid
            final[final < 0] = 0
            return
        final[frontier] = cand[frontier]


def _enforce_connectivity(labels: np.ndarray) -> tuple[np.ndarray, int]:
    """Keep each cluster's largest 4-connected component; orphans merge into neighbors."""
    final = np.full(labels.shape, -1, dtype=np.int32)
    next_label = 0
    structure = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])
    for k in range(int(labels.max()) + 1):
        mask = labels == k
        if not mask.any():
            continue
        comp, n_comp = ndimage.label(mask, structure=structure)
        if n_comp == 1:
            final[mask] = next_label
        else:
            sizes = ndimage.sum_labels(np.ones_like(comp), comp, index=range(1, n_comp + 1))
            keep = int(np.argmax(sizes)) + 1
            final[comp == keep] = next_label
        next_label += 1
    _fill_unassigned(final)
    return final, next_label


def slic_segment(image: ImageBuffer, n_segments: int, compactness: float = 10.0) -> SegmentLabelMap:
    """SLIC superpixels: k-means over (L, a, b, x, y), then connectivity cleanup.

    Seeds start on a regular grid sized to land near ``n_segments`` and the
    clustering runs a fixed 10 iterations, so the output is deterministic.
    """
    if not compactness > 0:
        raise ValueError("compactness must be > 0")
    h, w = image.height, image.width
    if n_segments < 1:
        raise ValueError("n_segments must be positive")
    if n_segments > w * h:
        raise TooManySegmentsError(f"{n_segments} segments requested for {w * h} pixels")

    lab = rgb_to_lab(image.pixels)
    gw, gh = _segment_grid(n_segments, w, h)
    span_x = w / gw
    span_y = h / gh
    spacing = math.sqrt(span_x * span_y)
    ratio = (compactness / spacing) ** 2

    # Seeds sit at the pixel-index center of each grid cell (a span of pixels
    # 0..s-1 centers on (s-1)/2), so equidistant ties fall between pixels.
    centers_y = (np.arange(gh) + 0.5) * span_y - 0.5
    centers_x = (np.arange(gw) + 0.5) * span_x - 0.5
    cy, cx = [g.ravel() for g in np.meshgrid(centers_y, centers_x, indexing="ij")]
    clab = lab[
        np.clip(np.round(cy).astype(int), 0, h - 1),
        np.clip(np.round(cx).astype(int), 0, w - 1),
    ]

    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij")
    labels = np.zeros((h, w), dtype=np.int32)
    for _ in range(10):
        dist = np.full((h, w), np.inf)
        labels.fill(-1)
        for k in range(len(cy)):
            y0 = max(0, int(cy[k] - 2 * span_y))
            y1 = min(h, int(cy[k] + 2 * span_y) + 1)
            x0 = max(0, int(cx[k] - 2 * span_x))
            x1 = min(w, int(cx[k] + 2 * span_x) + 1)
            d_lab = ((lab[y0:y1, x0:x1] - clab[k]) ** 2).sum(axis=2)
            d_xy = (yy[y0:y1, x0:x1] - cy[k]) ** 2 + (xx[y0:y1, x0:x1] - cx[k]) ** 2
            d = d_lab + ratio * d_xy
            win_dist = dist[y0:y1, x0:x1]
            closer = d < win_dist
            win_dist[closer] = d[closer]
            labels[y0:y1, x0:x1][closer] = k
        if (labels < 0).any():
            # A drifting center left coverage gaps; assign those globally.
            miss = np.argwhere(labels < 0)
            feats = lab[miss[:, 0], miss[:, 1]]
            d_lab = ((feats[:, None, :] - clab[None, :, :]) ** 2).sum(axis=2)
            d_xy = (miss[:, 0:1] - cy[None, :]) ** 2 + (miss[:, 1:2] - cx[None, :]) ** 2
            labels[miss[:, 0], miss[:, 1]] = np.argmin(d_lab + ratio * d_xy, axis=1)
        for k in range(len(cy)):
            sel = labels == k
            if sel.any():
                cy[k] = yy[sel].mean()
                cx[k] = xx[sel].mean()
                clab[k] = lab[sel].mean(axis=0)

    final, count = _enforce_connectivity(labels)
    return SegmentLabelMap(final, count)


# ---------------------------------------------------------------------------
# PNG conversion and saliency rendering


def load_png(path) -> ImageBuffer:
    with Image.open(path) as im:
        rgb = im.convert("RGB")
        arr = np.asarray(rgb, dtype=np.float64) / 255.0
    return ImageBuffer(arr)


def save_png(image: ImageBuffer, path) -> None:
    arr = np.round(image.pixels * 255.0).astype(np.uint8)
    Image.fromarray(arr, mode="RGB").save(path, format="PNG")


def decode_png_bytes(data: bytes) -> ImageBuffer:
    import io

    with Image.open(io.BytesIO(data)) as im:
        arr = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
    return ImageBuffer(arr)


def encode_png_bytes(image: ImageBuffer) -> bytes:
    import io

    arr = np.round(image.pixels * 255.0).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(arr, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


# Perceptually uniform ramp (viridis anchors). The web overlay and the CLI
# renderings must use this exact table so colors mean the same everywhere.
SALIENCY_COLORMAP_STOPS: tuple[tuple[float, tuple[int, int, int]], ...] = (
    (0.00, (68, 1, 84)),
    (0.25, (59, 82, 139)),
    (0.50, (33, 145, 140)),
    (0.75, (94, 201, 98)),
    (1.00, (253, 231, 37)),
)


def colorize_saliency(values01: np.ndarray) -> np.ndarray:
    """Map normalized saliency in [0, 1] to RGB floats via the shared ramp."""
    v = np.clip(np.asarray(values01, dtype=np.float64), 0.0, 1.0)
    pos = np.array([s for s, _ in SALIENCY_COLORMAP_STOPS])
    rgb = np.array([c for _, c in SALIENCY_COLORMAP_STOPS], dtype=np.float64) / 255.0
    out = np.empty(v.shape + (3,))
    for ch in range(3):
        out[..., ch] = np.interp(v, pos, rgb[:, ch])
    return out
