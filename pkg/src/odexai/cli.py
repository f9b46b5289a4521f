"""Command-line entry points: bench, explain, eval, serve."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from .core import BBox
from .detectors import create_backend
from .errors import OdexaiError
from .explainers import (
    ExplainerConfig,
    Method,
    TargetSpec,
    explain,
    load_saliency,
    save_explanation,
)
from .harness import (
    BenchmarkConfig,
    load_coco,
    load_voc,
    run_benchmark,
    write_report_bundle,
)
from .harness.benchmark import BenchmarkReport, aggregate
from .harness.report import emit_spider_svg
from .imageproc import ImageBuffer, colorize_saliency, load_png, save_png
from .metrics import MetricConfig, evaluate_all, records_to_jsonl


@click.group()
def main() -> None:
    """Explain object detections and score the explanations."""


def _explainer_config(method, masks, seed, grid, p, levels, gamma, sigma_scale) -> ExplainerConfig:
    return ExplainerConfig(
        method=Method(method),
        n_masks=masks,
        rise_grid=grid,
        rise_p=p,
        dclose_levels=tuple(int(v) for v in levels.split(",")),
        gamma_iou=gamma,
        gcame_sigma_scale=sigma_scale,
        rng_seed=seed,
    )


@main.command()
@click.option("--dataset", type=click.Choice(["coco", "voc"]), required=True)
@click.option("--ann", type=click.Path(exists=True), default=None, help="COCO annotation JSON.")
@click.option("--images", type=click.Path(exists=True), required=True, help="Image directory (VOC: dataset root).")
@click.option("--backend", "backend_specs", multiple=True, default=["synthetic"], show_default=True)
@click.option("--methods", default="drise,dclose", show_default=True)
@click.option("--masks", default=2000, show_default=True)
@click.option("--steps", default=100, show_default=True)
@click.option("--gamma", default=0.5, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--limit", default=50, show_default=True)
@click.option("--grid", default=16, show_default=True)
@click.option("--p", default=0.5, show_default=True)
@click.option("--levels", default="50,150,300,600", show_default=True)
@click.option("--sigma-scale", default=0.25, show_default=True)
@click.option("--workers", default=1, show_default=True)
@click.option("--out", type=click.Path(), required=True)
def bench(dataset, ann, images, backend_specs, methods, masks, steps, gamma, seed, limit,
          grid, p, levels, sigma_scale, workers, out):
    """Run the benchmark over a dataset and write the report bundle."""
    if dataset == "coco":
        if ann is None:
            raise click.UsageError("--ann is required for COCO datasets")
        index = load_coco(ann, images)
    else:
        index = load_voc(images)
    cfg = BenchmarkConfig(
        explainer=_explainer_config("drise", masks, seed, grid, p, levels, gamma, sigma_scale),
        metrics=MetricConfig(steps=steps, gamma=gamma),
        workers=workers,
    )
    backends = [create_backend(s) for s in backend_specs]
    try:
        report = run_benchmark(
            index,
            backends,
            [Method(m.strip()) for m in methods.split(",") if m.strip()],
            cfg,
            sample_limit=limit,
        )
    finally:
        for backend in backends:
            backend.close()
    paths = write_report_bundle(report, out)
    click.echo(f"wrote {len(report.records)} records, {len(report.skips)} skips")
    for name, path in paths.items():
        click.echo(f"  {name}: {path}")


@main.command(name="explain")
@click.option("--image", "image_path", type=click.Path(exists=True), required=True)
@click.option("--backend", "backend_spec", default="synthetic", show_default=True)
@click.option("--method", type=click.Choice([m.value for m in Method]), required=True)
@click.option("--target-index", default=0, show_default=True)
@click.option("--masks", default=2000, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--grid", default=16, show_default=True)
@click.option("--p", default=0.5, show_default=True)
@click.option("--levels", default="50,150,300,600", show_default=True)
@click.option("--gamma", default=0.5, show_default=True)
@click.option("--sigma-scale", default=0.25, show_default=True)
@click.option("--layer", default="", help="White-box capture layer for gradient-based explanation.")
@click.option("--workers", default=1, show_default=True)
@click.option("--out", type=click.Path(), required=True)
def explain_cmd(image_path, backend_spec, method, target_index, masks, seed, grid, p, levels,
                gamma, sigma_scale, layer, workers, out):
    """Explain one detection of one image; writes saliency.pgm + sidecar + overlay."""
    image = load_png(image_path)
    cfg = _explainer_config(method, masks, seed, grid, p, levels, gamma, sigma_scale)
    backend = create_backend(backend_spec)
    try:
        detections = backend.detect_batch([image])[0]
        if not detections:
            raise click.ClickException("backend found no detections in the image")
        if not 0 <= target_index < len(detections):
            raise click.ClickException(
                f"--target-index {target_index} out of range ({len(detections)} detections)"
            )
        target = detections[target_index]
        capture = None
        if cfg.method is Method.GCAME:
            capture = backend.capture(image, layer, target_index)
        result = explain(
            backend, image, TargetSpec(target, Path(image_path).stem), cfg,
            capture=capture, workers=workers,
        )
    except OdexaiError as exc:
        raise click.ClickException(f"{type(exc).__name__}: {exc}") from exc
    finally:
        backend.close()
    pgm_path, sidecar_path = save_explanation(
        result, out, image_id=Path(image_path).stem, target_bbox=target.bbox
    )
    overlay = 0.5 * image.pixels + 0.5 * colorize_saliency(result.saliency.values)
    overlay_path = Path(out) / "overlay.png"
    save_png(ImageBuffer(np.clip(overlay, 0.0, 1.0)), overlay_path)
    click.echo(f"saliency: {pgm_path}")
    click.echo(f"sidecar:  {sidecar_path}")
    click.echo(f"overlay:  {overlay_path}")
    click.echo(f"elapsed:  {result.elapsed_s:.3f}s")


@main.command(name="eval")
@click.option("--saliency", "saliency_path", type=click.Path(exists=True), required=True)
@click.option("--image", "image_path", type=click.Path(exists=True), required=True)
@click.option("--backend", "backend_spec", default="synthetic", show_default=True)
@click.option("--roi", required=True, help="Ground-truth box as x1,y1,x2,y2.")
@click.option("--steps", default=100, show_default=True)
@click.option("--gamma", default=0.5, show_default=True)
@click.option("--out", type=click.Path(), required=True)
def eval_cmd(saliency_path, image_path, backend_spec, roi, steps, gamma, out):
    """Evaluate an externally produced saliency map against a ground-truth box."""
    try:
        roi_box = BBox(*(float(v) for v in roi.split(",")))
    except (TypeError, ValueError) as exc:
        raise click.ClickException(f"--roi must be x1,y1,x2,y2: {exc}") from exc
    image = load_png(image_path)
    saliency = load_saliency(saliency_path)
    backend = create_backend(backend_spec)
    try:
        detections = backend.detect_batch([image])[0]
        from .core import iou as box_iou

        candidates = [d for d in detections if box_iou(d.bbox, roi_box) >= gamma]
        if not candidates:
            raise click.ClickException(
                f"no detection overlaps the ROI at IoU >= {gamma}; cannot evaluate faithfulness"
            )
        target = max(candidates, key=lambda d: box_iou(d.bbox, roi_box))

        from .explainers.config import ExplanationResult, config_digest

        explanation = ExplanationResult(
            saliency, 0.0, Method.DRISE, config_digest(ExplainerConfig(method=Method.DRISE))
        )
        record = evaluate_all(
            backend,
            image,
            explanation,
            target,
            roi_box,
            MetricConfig(steps=steps, gamma=gamma),
            model=backend.descriptor().name,
            dataset="adhoc",
            image_id=Path(image_path).stem,
            instance_id="roi",
            category=backend.descriptor().class_names[target.label],
        )
    except OdexaiError as exc:
        raise click.ClickException(f"{type(exc).__name__}: {exc}") from exc
    finally:
        backend.close()
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "record.json").write_text(json.dumps(record.to_dict(), indent=2, sort_keys=True) + "\n")
    (out_dir / "records.jsonl").write_text(records_to_jsonl([record]))
    report = BenchmarkReport(config={}, records=(record,), aggregates=aggregate([record]))
    (out_dir / "spider_3axis.svg").write_bytes(emit_spider_svg(report, "three_axis"))
    click.echo(json.dumps(record.to_dict(), indent=2, sort_keys=True))


@main.command()
@click.option("--root", type=click.Path(), default="./odexai-data", show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="TOML file with a [backends] table of name -> spec.")
@click.option("--ui-dir", type=click.Path(), default=None, help="Built web UI bundle to serve at /ui.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(root, config_path, ui_dir, host, port):
    """Run the HTTP service."""
    import uvicorn

    from .detectors import load_registry
    from .service import create_app

    backends = load_registry(config_path) if config_path else {"synthetic": "synthetic"}
    if ui_dir is None:
        candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        ui_dir = candidate if candidate.is_dir() else None
    app = create_app(root, backends=backends, ui_dir=ui_dir)
    click.echo(f"serving on http://{host}:{port} (backends: {', '.join(sorted(backends))})")
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    sys.exit(main())
