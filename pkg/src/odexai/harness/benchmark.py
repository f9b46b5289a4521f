"""Batch benchmark execution and per-category aggregation."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping, Sequence

from ..core import Detection, GroundTruthInstance, ImageBuffer, iou
from ..detectors.base import DetectorBackend
from ..detectors.base import detect as run_detect
from ..errors import BackendUnavailableError, EmptyGroupError, OdexaiError
from ..explainers import ExplainerConfig, Method, TargetSpec, explain
from ..imageproc import load_png
from ..metrics import EvaluationRecord, MetricConfig, evaluate_all
from .datasets import DatasetIndex, ImageEntry

GroupKey = tuple[str, str, str]  # (method, model, dataset)


@dataclass(frozen=True)
class BenchmarkConfig:
    explainer: ExplainerConfig = ExplainerConfig(method=Method.DRISE)
    metrics: MetricConfig = MetricConfig()
    workers: int = 1

    def to_dict(self) -> dict:
        return {
            "explainer": self.explainer.to_dict(),
            "metrics": self.metrics.to_dict(),
            "workers": self.workers,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "BenchmarkConfig":
        return cls(
            explainer=ExplainerConfig(**obj["explainer"]),
            metrics=MetricConfig(**obj["metrics"]),
            workers=int(obj.get("workers", 1)),
        )


@dataclass(frozen=True)
class GroupAggregate:
    """Per (method, model, dataset) means; PG and EBPG average per category first."""

    ins_auc: float
    del_auc: float
    oa: float
    pg: float
    ebpg: float | None
    sparsity: float
    time_s: float
    pg_record_mean: float
    ebpg_record_mean: float | None
    n_records: int
    n_ebpg: int

    def to_dict(self) -> dict:
        return {
            "ins_auc": self.ins_auc,
            "del_auc": self.del_auc,
            "oa": self.oa,
            "pg": self.pg,
            "ebpg": self.ebpg,
            "sparsity": self.sparsity,
            "time_s": self.time_s,
            "pg_record_mean": self.pg_record_mean,
            "ebpg_record_mean": self.ebpg_record_mean,
            "n_records": self.n_records,
            "n_ebpg": self.n_ebpg,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "GroupAggregate":
        return cls(**obj)


@dataclass(frozen=True)
class BenchmarkReport:
    config: Mapping
    records: tuple[EvaluationRecord, ...]
    aggregates: Mapping[GroupKey, GroupAggregate]
    skips: tuple[Mapping, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "records", tuple(self.records))
        object.__setattr__(self, "skips", tuple(dict(s) for s in self.skips))


def _mean(values: Sequence[float]) -> float:
    return sum(values) / len(values)


def aggregate(records: Sequence[EvaluationRecord]) -> dict[GroupKey, GroupAggregate]:
    """Group by (method, model, dataset) and average.

    Ins/Del/OA/Sparsity/Time are plain record means. PG and EBPG are first
    averaged within each category and then across categories with uniform
    weights; record-level means are kept alongside. Missing EBPG values are
    excluded from every denominator.
    """
    if not records:
        raise EmptyGroupError("no records to aggregate")
    groups: dict[GroupKey, list[EvaluationRecord]] = {}
    for record in records:
        groups.setdefault((record.method, record.model, record.dataset), []).append(record)

    out: dict[GroupKey, GroupAggregate] = {}
    for key, group in sorted(groups.items()):
        by_category: dict[str, list[EvaluationRecord]] = {}
        for record in group:
            by_category.setdefault(record.category, []).append(record)
        pg_per_cat = [_mean([float(r.pg_hit) for r in recs]) for recs in by_category.values()]
        ebpg_per_cat = []
        for recs in by_category.values():
            present = [r.ebpg for r in recs if r.ebpg is not None]
            if present:
                ebpg_per_cat.append(_mean(present))
        ebpg_present = [r.ebpg for r in group if r.ebpg is not None]
        out[key] = GroupAggregate(
            ins_auc=_mean([r.ins_auc for r in group]),
            del_auc=_mean([r.del_auc for r in group]),
            oa=_mean([r.oa for r in group]),
            pg=_mean(pg_per_cat),
            ebpg=_mean(ebpg_per_cat) if ebpg_per_cat else None,
            sparsity=_mean([r.sparsity for r in group]),
            time_s=_mean([r.time_s for r in group]),
            pg_record_mean=_mean([float(r.pg_hit) for r in group]),
            ebpg_record_mean=_mean(ebpg_present) if ebpg_present else None,
            n_records=len(group),
            n_ebpg=len(ebpg_present),
        )
    return out


def match_target(
    detections: Sequence[Detection],
    instance: GroundTruthInstance,
    instance_class: str,
    class_names: Sequence[str],
    gamma: float,
) -> Detection | None:
    """Best same-class detection with IoU >= gamma against the annotation, if any."""
    best: Detection | None = None
    best_iou = 0.0
    for det in detections:
        if class_names[det.label] != instance_class:
            continue
        overlap = iou(det.bbox, instance.bbox)
        if overlap >= gamma and overlap > best_iou:
            best, best_iou = det, overlap
    return best


def run_benchmark(
    index: DatasetIndex,
    backends: Sequence[DetectorBackend],
    methods: Sequence[Method],
    cfg: BenchmarkConfig = BenchmarkConfig(),
    sample_limit: int = 50,
) -> BenchmarkReport:
    """Evaluate every method on every backend over a deterministic instance sample.

    Instances are visited sorted by (image_id, instance_id) and truncated at
    ``sample_limit``. Per-record failures are logged and skipped; only a
    backend handshake failure aborts the run.
    """
    if not backends or not methods:
        raise ValueError("need at least one backend and one method")
    if sample_limit < 1:
        raise ValueError("sample_limit must be >= 1")

    samples: list[tuple[ImageEntry, GroundTruthInstance]] = []
    for entry in sorted(index.images, key=lambda e: e.image_id):
        for instance in sorted(index.annotations.get(entry.image_id, ()), key=lambda i: i.instance_id):
            samples.append((entry, instance))
    samples = samples[:sample_limit]

    records: list[EvaluationRecord] = []
    skips: list[dict] = []
    for backend in backends:
        descriptor = backend.descriptor()  # handshake failures propagate
        image_cache: dict[str, tuple[ImageBuffer, list[Detection]]] = {}
        for entry, instance in samples:
            category = index.categories[instance.label]
            if entry.image_id not in image_cache:
                image = load_png(entry.path)
                try:
                    detections = run_detect(backend, [image])[0]
                except BackendUnavailableError:
                    raise
                image_cache[entry.image_id] = (image, detections)
            image, detections = image_cache[entry.image_id]
            target = match_target(
                detections, instance, category, descriptor.class_names, cfg.metrics.gamma
            )
            if target is None:
                skips.append(
                    {
                        "image_id": entry.image_id,
                        "instance_id": instance.instance_id,
                        "model": descriptor.name,
                        "reason": "no matching detection",
                    }
                )
                continue
            for method in methods:
                if method is Method.GCAME and not descriptor.supports_whitebox:
                    skips.append(
                        {
                            "image_id": entry.image_id,
                            "instance_id": instance.instance_id,
                            "model": descriptor.name,
                            "method": method.value,
                            "reason": "backend lacks white-box capture support",
                        }
                    )
                    continue
                method_cfg = replace(cfg.explainer, method=method)
                try:
                    capture = None
                    if method is Method.GCAME:
                        capture = backend.capture(image, "", 0)  # type: ignore[attr-defined]
                    explanation = explain(
                        backend,
                        image,
                        TargetSpec(target, entry.image_id),
                        method_cfg,
                        capture=capture,
                        workers=cfg.workers,
                    )
                    records.append(
                        evaluate_all(
                            backend,
                            image,
                            explanation,
                            target,
                            instance.bbox,
                            cfg.metrics,
                            model=descriptor.name,
                            dataset=index.name,
                            image_id=entry.image_id,
                            instance_id=instance.instance_id,
                            category=category,
                        )
                    )
                except BackendUnavailableError:
                    raise
                except OdexaiError as exc:
                    skips.append(
                        {
                            "image_id": entry.image_id,
                            "instance_id": instance.instance_id,
                            "model": descriptor.name,
                            "method": method.value,
                            "reason": f"{type(exc).__name__}: {exc}",
                        }
                    )
    return BenchmarkReport(
        config=cfg.to_dict(),
        records=tuple(records),
        aggregates=aggregate(records) if records else {},
        skips=tuple(skips),
    )
