"""The seven evaluation metrics for one (saliency map, target, image, backend) tuple.

Localization: pointing-game hit and energy fraction inside the target box.
Faithfulness: deletion/insertion perturbation curves, their AUCs, and the
insertion-minus-deletion overall score. Complexity: sparsity of the
normalized map and the explanation wall-clock time.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .core import BBox, Detection, ImageBuffer, SaliencyMap, iou
from .detectors.base import DetectorBackend, detect
from .errors import (
    BadDomainError,
    EmptySampleError,
    ZeroEnergyError,
)
from .explainers.config import ExplanationResult
from .imageproc import gaussian_blur, normalize_array

TABLE_COLUMNS = ("Ins", "Del", "OA", "PG", "EBPG", "Sparsity", "Time(s)")


# ---------------------------------------------------------------------------
# localization


def pointing_game_hit(saliency: SaliencyMap, roi: BBox) -> bool:
    """True iff any pixel attaining the global maximum lies inside the ROI.

    Ties pick "any": deterministic and method-neutral once maps are
    continuous.
    """
    values = saliency.values
    peak = values == values.max()
    inside = roi.pixel_mask(saliency.width, saliency.height)
    return bool((peak & inside).any())


def pg_accuracy(hits: int, misses: int) -> float:
    if hits < 0 or misses < 0:
        raise ValueError("counts must be non-negative")
    if hits + misses == 0:
        raise EmptySampleError("no localization samples to average")
    return hits / (hits + misses)


def ebpg(saliency: SaliencyMap, roi: BBox) -> float:
    """Fraction of total saliency energy inside the ROI.

    Negative values clamp to 0 first; the energy notion presumes
    non-negative intensity.
    """
    energy = np.maximum(saliency.values, 0.0)
    total = energy.sum()
    if total == 0.0:
        raise ZeroEnergyError("saliency map has zero total energy")
    inside = energy[roi.pixel_mask(saliency.width, saliency.height)].sum()
    return float(inside / total)


# ---------------------------------------------------------------------------
# faithfulness


def auc(points: Sequence[tuple[float, float]]) -> float:
    """Trapezoid integral of a curve whose x values strictly increase over [0, 1]."""
    xs = np.array([p[0] for p in points], dtype=np.float64)
    ys = np.array([p[1] for p in points], dtype=np.float64)
    if xs.size < 2 or np.any(np.diff(xs) <= 0) or xs[0] != 0.0 or xs[-1] != 1.0:
        raise BadDomainError("curve abscissae must strictly increase from 0 to 1")
    return float(np.trapezoid(ys, xs))


def overall(ins_auc: float, del_auc: float) -> float:
    return ins_auc - del_auc


@dataclass(frozen=True)
class PerturbationCurve:
    points: tuple[tuple[float, float], ...]
    auc: float
    direction: str  # "deletion" | "insertion"

    def __post_init__(self) -> None:
        if self.direction not in ("deletion", "insertion"):
            raise ValueError(f"unknown direction {self.direction!r}")
        points = tuple((float(x), float(y)) for x, y in self.points)
        object.__setattr__(self, "points", points)
        if abs(auc(points) - self.auc) > 1e-9:
            raise ValueError("stored auc disagrees with the trapezoid rule over points")


def target_score(
    detections: Sequence[Detection],
    target: Detection,
    gamma: float,
    use_objectness: bool = True,
) -> float:
    """Confidence the detector still assigns the target after a perturbation.

    Among detections of the target's class with box IoU >= gamma, take the
    best class probability (times objectness unless disabled); 0 when none
    qualify.
    """
    if not 0.0 < gamma <= 1.0:
        raise ValueError("gamma must lie in (0, 1]")
    best = 0.0
    for det in detections:
        if det.label != target.label:
            continue
        if iou(det.bbox, target.bbox) < gamma:
            continue
        score = float(det.class_probs[target.label])
        if use_objectness:
            score *= det.objectness
        best = max(best, score)
    return best


def saliency_pixel_order(saliency: SaliencyMap) -> np.ndarray:
    """Flat pixel indices, most salient first; ties break by row-major index.

    Deletion and insertion share this ordering by construction.
    """
    return np.argsort(-saliency.values.ravel(), kind="stable")


def _perturbed_images(
    image: ImageBuffer,
    order: np.ndarray,
    steps: int,
    reveal: bool,
    baseline: np.ndarray,
) -> Iterator[ImageBuffer]:
    h, w = image.height, image.width
    n = h * w
    source = image.pixels.reshape(n, 3)
    base = baseline.reshape(n, 3)
    for k in range(steps + 1):
        count = (k * n) // steps
        chosen = order[:count]
        if reveal:
            frame = base.copy()
            frame[chosen] = source[chosen]
        else:
            frame = source.copy()
            frame[chosen] = base[chosen]
        yield ImageBuffer(frame.reshape(h, w, 3))


def _curve_scores(
    backend: DetectorBackend,
    images: Iterator[ImageBuffer],
    target: Detection,
    gamma: float,
    use_objectness: bool,
) -> list[float]:
    max_batch = backend.descriptor().max_batch
    scores: list[float] = []
    batch: list[ImageBuffer] = []

    def flush() -> None:
        if batch:
            for detections in detect(backend, batch):
                scores.append(target_score(detections, target, gamma, use_objectness))
            batch.clear()

    for image in images:
        batch.append(image)
        if len(batch) == max_batch:
            flush()
    flush()
    return scores


def deletion_curve(
    backend: DetectorBackend,
    image: ImageBuffer,
    saliency: SaliencyMap,
    target: Detection,
    steps: int = 100,
    gamma: float = 0.5,
    *,
    use_objectness: bool = True,
) -> PerturbationCurve:
    """Replace the top-ranked pixels with black, a growing fraction per step."""
    if steps < 2:
        raise ValueError("steps must be >= 2")
    if (saliency.width, saliency.height) != (image.width, image.height):
        raise ValueError("saliency and image dimensions must match")
    order = saliency_pixel_order(saliency)
    black = np.zeros_like(image.pixels)
    scores = _curve_scores(
        backend,
        _perturbed_images(image, order, steps, reveal=False, baseline=black),
        target,
        gamma,
        use_objectness,
    )
    points = tuple((k / steps, s) for k, s in enumerate(scores))
    return PerturbationCurve(points, auc(points), "deletion")


def insertion_curve(
    backend: DetectorBackend,
    image: ImageBuffer,
    saliency: SaliencyMap,
    target: Detection,
    steps: int = 100,
    gamma: float = 0.5,
    *,
    use_objectness: bool = True,
    baseline: str = "black",
    blur_sigma: float = 8.0,
) -> PerturbationCurve:
    """Reveal the top-ranked pixels into a blank (or blurred) canvas."""
    if steps < 2:
        raise ValueError("steps must be >= 2")
    if (saliency.width, saliency.height) != (image.width, image.height):
        raise ValueError("saliency and image dimensions must match")
    if baseline == "black":
        canvas = np.zeros_like(image.pixels)
    elif baseline == "blur":
        canvas = gaussian_blur(image, blur_sigma).pixels
    else:
        raise ValueError(f"unknown insertion baseline {baseline!r}")
    order = saliency_pixel_order(saliency)
    scores = _curve_scores(
        backend,
        _perturbed_images(image, order, steps, reveal=True, baseline=canvas),
        target,
        gamma,
        use_objectness,
    )
    points = tuple((k / steps, s) for k, s in enumerate(scores))
    return PerturbationCurve(points, auc(points), "insertion")


# ---------------------------------------------------------------------------
# complexity


def sparsity(saliency: SaliencyMap) -> float:
    """Max-to-mean ratio after min-max normalization; always >= 1.

    Constant maps normalize to all ones and so score exactly 1, the worst
    (least focused) possible value.
    """
    return float(1.0 / normalize_array(saliency.values).mean())


# ---------------------------------------------------------------------------
# the full record


@dataclass(frozen=True)
class MetricConfig:
    steps: int = 100
    gamma: float = 0.5
    insertion_baseline: str = "black"
    blur_sigma: float = 8.0
    use_objectness: bool = True

    def __post_init__(self) -> None:
        if self.steps < 2:
            raise ValueError("steps must be >= 2")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must lie in (0, 1]")
        if self.insertion_baseline not in ("black", "blur"):
            raise ValueError("insertion_baseline must be 'black' or 'blur'")

    def to_dict(self) -> dict:
        return {
            "steps": self.steps,
            "gamma": self.gamma,
            "insertion_baseline": self.insertion_baseline,
            "blur_sigma": self.blur_sigma,
            "use_objectness": self.use_objectness,
        }


@dataclass(frozen=True)
class EvaluationRecord:
    """One method x model x image x target row of the seven metric values."""

    method: str
    model: str
    dataset: str
    image_id: str
    instance_id: str
    category: str
    ins_auc: float
    del_auc: float
    oa: float
    pg_hit: bool
    ebpg: float | None
    sparsity: float
    time_s: float

    def __post_init__(self) -> None:
        if abs(self.oa - (self.ins_auc - self.del_auc)) > 1e-9:
            raise ValueError("oa must equal ins_auc - del_auc")
        if self.ebpg is not None and not 0.0 <= self.ebpg <= 1.0:
            raise ValueError("ebpg must lie in [0, 1] when present")
        if self.sparsity < 1.0:
            raise ValueError("sparsity must be >= 1")
        if self.time_s < 0.0:
            raise ValueError("time_s must be >= 0")

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "model": self.model,
            "dataset": self.dataset,
            "image_id": self.image_id,
            "instance_id": self.instance_id,
            "category": self.category,
            "ins_auc": self.ins_auc,
            "del_auc": self.del_auc,
            "oa": self.oa,
            "pg_hit": self.pg_hit,
            "ebpg": self.ebpg,
            "sparsity": self.sparsity,
            "time_s": self.time_s,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "EvaluationRecord":
        return cls(**{k: (tuple(v) if isinstance(v, list) else v) for k, v in obj.items()})


def evaluate_all(
    backend: DetectorBackend,
    image: ImageBuffer,
    explanation: ExplanationResult,
    target: Detection,
    ground_truth_roi: BBox,
    cfg: MetricConfig = MetricConfig(),
    *,
    model: str = "",
    dataset: str = "",
    image_id: str = "",
    instance_id: str = "",
    category: str = "",
) -> EvaluationRecord:
    """Compute all seven metrics; a zero-energy map records EBPG as missing."""
    saliency = explanation.saliency
    if (saliency.width, saliency.height) != (image.width, image.height):
        raise ValueError(
            f"saliency {saliency.width}x{saliency.height} does not match "
            f"image {image.width}x{image.height}"
        )
    del_curve = deletion_curve(
        backend, image, saliency, target, cfg.steps, cfg.gamma, use_objectness=cfg.use_objectness
    )
    ins_curve = insertion_curve(
        backend,
        image,
        saliency,
        target,
        cfg.steps,
        cfg.gamma,
        use_objectness=cfg.use_objectness,
        baseline=cfg.insertion_baseline,
        blur_sigma=cfg.blur_sigma,
    )
    try:
        energy_fraction: float | None = ebpg(saliency, ground_truth_roi)
    except ZeroEnergyError:
        energy_fraction = None
    return EvaluationRecord(
        method=explanation.method.value,
        model=model,
        dataset=dataset,
        image_id=image_id,
        instance_id=instance_id,
        category=category,
        ins_auc=ins_curve.auc,
        del_auc=del_curve.auc,
        oa=overall(ins_curve.auc, del_curve.auc),
        pg_hit=pointing_game_hit(saliency, ground_truth_roi),
        ebpg=energy_fraction,
        sparsity=sparsity(saliency),
        time_s=explanation.elapsed_s,
    )


# ---------------------------------------------------------------------------
# serialization


def records_to_jsonl(records: Iterable[EvaluationRecord]) -> str:
    return "".join(json.dumps(r.to_dict(), sort_keys=True) + "\n" for r in records)


def records_from_jsonl(text: str) -> list[EvaluationRecord]:
    return [EvaluationRecord.from_dict(json.loads(line)) for line in text.splitlines() if line.strip()]


def records_to_csv(records: Iterable[EvaluationRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(
        ["method", "model", "dataset", "image_id", "instance_id", "category", *TABLE_COLUMNS]
    )
    for r in records:
        writer.writerow(
            [
                r.method,
                r.model,
                r.dataset,
                r.image_id,
                r.instance_id,
                r.category,
                repr(r.ins_auc),
                repr(r.del_auc),
                repr(r.oa),
                int(r.pg_hit),
                "" if r.ebpg is None else repr(r.ebpg),
                repr(r.sparsity),
                repr(r.time_s),
            ]
        )
    return buf.getvalue()
