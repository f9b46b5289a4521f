"""Acceptance suite: one test per criterion, one printed verdict line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the verdict lines.
The synthetic-backend battery (criteria 4-6) is the slow part; everything
else finishes in seconds.
"""

import sys
import time
from pathlib import Path

import numpy as np
import pytest

from odexai.core import BBox, SaliencyMap
from odexai.detectors import (
    SubprocessBackend,
    SyntheticBackend,
    WhiteBoxCapture,
    load_whitebox_capture,
    synthetic_detect,
    write_odt,
)
from odexai.errors import (
    BackendTimeoutError,
    BackendUnavailableError,
    FormatError,
    NonFiniteTensorError,
    ProtocolViolationError,
)
from odexai.explainers import (
    ExplainerConfig,
    Method,
    TargetSpec,
    explain_dclose,
    explain_drise,
    explain_gcame,
    gaussian_kernel,
)
from odexai.harness import load_coco, parse_table_csv, run_benchmark, write_report_bundle
from odexai.harness.benchmark import BenchmarkConfig
from odexai.metrics import (
    MetricConfig,
    auc,
    deletion_curve,
    ebpg,
    evaluate_all,
    insertion_curve,
    overall,
    pg_accuracy,
    pointing_game_hit,
    sparsity,
)
from conftest import blob_image
from test_harness import make_coco_dataset
from test_metrics import riemann_auc

SCRIPT = Path(__file__).parent / "fake_backends" / "scripted.py"


def verdict(number: int, text: str) -> None:
    print(f"\n[ACCEPTANCE] criterion {number}: PASS — {text}")


# ---------------------------------------------------------------------------
# criterion 1: published-results arithmetic fixture
#
# Twelve (dataset, model, method) columns of the reference results table,
# as (Ins, Del, OA, PG%, EBPG%, Sparsity, Time_s).

REFERENCE_TABLE = {
    ("MS-COCO", "YOLOX", "D-CLOSE"): (0.908, 0.027, 0.881, 87.86, 35.45, 25.02, 70.12),
    ("MS-COCO", "YOLOX", "G-CAME"): (0.703, 0.059, 0.644, 94.31, 67.16, 2.84, 0.43),
    ("MS-COCO", "YOLOX", "D-RISE"): (0.812, 0.043, 0.769, 86.55, 18.47, 4.43, 98.67),
    ("MS-COCO", "Faster R-CNN", "D-CLOSE"): (0.912, 0.049, 0.863, 88.49, 36.13, 26.13, 71.42),
    ("MS-COCO", "Faster R-CNN", "G-CAME"): (0.718, 0.169, 0.549, 96.13, 70.11, 4.95, 0.54),
    ("MS-COCO", "Faster R-CNN", "D-RISE"): (0.867, 0.152, 0.715, 84.12, 20.74, 5.91, 99.11),
    ("PASCAL VOC", "YOLOX", "D-CLOSE"): (0.804, 0.128, 0.676, 81.48, 29.23, 26.84, 70.94),
    ("PASCAL VOC", "YOLOX", "G-CAME"): (0.512, 0.183, 0.329, 93.96, 58.39, 3.81, 0.48),
    ("PASCAL VOC", "YOLOX", "D-RISE"): (0.775, 0.103, 0.672, 79.01, 28.11, 12.45, 99.19),
    ("PASCAL VOC", "Faster R-CNN", "D-CLOSE"): (0.826, 0.171, 0.655, 82.94, 31.84, 27.12, 72.94),
    ("PASCAL VOC", "Faster R-CNN", "G-CAME"): (0.534, 0.284, 0.250, 95.13, 57.84, 4.91, 0.63),
    ("PASCAL VOC", "Faster R-CNN", "D-RISE"): (0.783, 0.206, 0.577, 80.11, 29.94, 6.21, 99.98),
}


def test_criterion_1_reference_table_arithmetic():
    start = time.perf_counter()
    assert len(REFERENCE_TABLE) == 12
    for key, (ins, dele, oa, *_rest) in REFERENCE_TABLE.items():
        assert abs(overall(ins, dele) - oa) <= 0.001, f"OA identity violated for {key}"
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    verdict(1, f"all 12 reference columns satisfy Ins - Del = OA within 0.001 ({elapsed:.3f}s)")


# ---------------------------------------------------------------------------
# criterion 2: metric exactness on handcrafted cases


def test_criterion_2_metric_exactness():
    start = time.perf_counter()
    tol = 1e-9

    assert abs(pg_accuracy(7, 3) - 0.7) <= tol
    assert abs(pg_accuracy(0, 5) - 0.0) <= tol
    assert abs(pg_accuracy(10, 0) - 1.0) <= tol
    peak = np.zeros((100, 100))
    peak[50, 50] = 1.0
    assert pointing_game_hit(SaliencyMap(peak), BBox(40, 40, 60, 60)) is True
    lone = np.zeros((100, 100))
    lone[5, 5] = 1.0
    assert pointing_game_hit(SaliencyMap(lone), BBox(40, 40, 60, 60)) is False
    tied = peak.copy()
    tied[5, 5] = 1.0
    assert pointing_game_hit(SaliencyMap(tied), BBox(40, 40, 60, 60)) is True

    inside = np.zeros((100, 100))
    inside[40:60, 40:60] = 1.0
    assert abs(ebpg(SaliencyMap(inside), BBox(40, 40, 60, 60)) - 1.0) <= tol
    assert abs(ebpg(SaliencyMap(np.ones((40, 40))), BBox(0, 0, 20, 20)) - 0.25) <= tol

    assert abs(sparsity(SaliencyMap(np.full((6, 6), 0.7))) - 1.0) <= tol
    half = np.zeros((4, 4))
    half[:2] = 1.0
    assert abs(sparsity(SaliencyMap(half)) - 2.0) <= tol
    single = np.zeros((5, 5))
    single[2, 2] = 3.0
    assert abs(sparsity(SaliencyMap(single)) - 25.0) <= tol

    assert abs(auc([(0.0, 1.0), (0.5, 1.0), (1.0, 1.0)]) - 1.0) <= tol
    assert abs(auc([(0.0, 1.0), (1.0, 0.0)]) - 0.5) <= tol
    assert abs(auc([(0.0, 1.0), (0.5, 1.0), (1.0, 0.0)]) - 0.75) <= tol

    assert abs(overall(0.908, 0.027) - 0.881) <= tol
    assert abs(overall(0.912, 0.049) - 0.863) <= tol
    assert abs(overall(0.5, 0.5)) <= tol

    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    verdict(2, f"PG, EBPG, Sparsity, AUC, OA match analytic values at 1e-9 ({elapsed:.3f}s)")


# ---------------------------------------------------------------------------
# criterion 3: trapezoid AUC vs dense Riemann oracle


def test_criterion_3_auc_against_riemann_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(100):
        n_knots = int(rng.integers(2, 14))
        xs = np.concatenate([[0.0], np.sort(rng.random(n_knots - 2)), [1.0]]) if n_knots > 2 else np.array([0.0, 1.0])
        xs = np.unique(xs)
        ys = rng.random(xs.size)
        points = list(zip(xs.tolist(), ys.tolist()))
        worst = max(worst, abs(auc(points) - riemann_auc(points)))
    assert worst <= 1e-6
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0
    verdict(3, f"100 random piecewise-linear curves, max |trapezoid - Riemann| = {worst:.2e} ({elapsed:.2f}s)")


# ---------------------------------------------------------------------------
# criteria 4 and 5 share one battery of 20 seeded synthetic runs


def seeded_blob(index: int):
    rng = np.random.default_rng(1000 + index)
    width = int(rng.integers(26, 42))
    height = int(rng.integers(26, 42))
    x1 = int(rng.integers(4, 96 - width - 4))
    y1 = int(rng.integers(4, 96 - height - 4))
    channel = int(rng.integers(0, 3))
    box = (x1, y1, x1 + width, y1 + height)
    return blob_image(box=box, channel=channel), box


@pytest.fixture(scope="module")
def battery():
    backend = SyntheticBackend()
    runs = {Method.DRISE: [], Method.DCLOSE: []}
    start = time.perf_counter()
    for index in range(20):
        image, box = seeded_blob(index)
        target = TargetSpec(synthetic_detect(image)[0], image_id=f"blob{index}")
        drise_cfg = ExplainerConfig(method=Method.DRISE, n_masks=500, rng_seed=index)
        dclose_cfg = ExplainerConfig(
            method=Method.DCLOSE, n_masks=400, dclose_levels=(50, 150), rng_seed=index
        )
        runs[Method.DRISE].append(
            (image, box, target, explain_drise(backend, image, target, drise_cfg))
        )
        runs[Method.DCLOSE].append(
            (image, box, target, explain_dclose(backend, image, target, dclose_cfg))
        )
    return backend, runs, time.perf_counter() - start


def test_criterion_4_synthetic_faithfulness(battery):
    backend, runs, build_s = battery
    start = time.perf_counter()
    for method, entries in runs.items():
        deletion_wins = 0
        insertion_wins = 0
        for image, _box, target, result in entries:
            saliency = result.saliency
            inverted = SaliencyMap(1.0 - saliency.values)
            kwargs = dict(steps=50, gamma=0.5)
            del_map = deletion_curve(backend, image, saliency, target.detection, **kwargs)
            del_inv = deletion_curve(backend, image, inverted, target.detection, **kwargs)
            ins_map = insertion_curve(backend, image, saliency, target.detection, **kwargs)
            ins_inv = insertion_curve(backend, image, inverted, target.detection, **kwargs)
            deletion_wins += del_map.auc < del_inv.auc
            insertion_wins += ins_map.auc > ins_inv.auc
        assert deletion_wins >= 18, f"{method}: deletion beat inverted only {deletion_wins}/20"
        assert insertion_wins >= 18, f"{method}: insertion beat inverted only {insertion_wins}/20"
    elapsed = time.perf_counter() - start + build_s
    assert elapsed < 300.0
    verdict(4, f"del/ins AUC beats inverted maps >= 18/20 for both methods ({elapsed:.1f}s incl. battery)")


def test_criterion_5_synthetic_localization(battery):
    _backend, runs, _build_s = battery
    for method, entries in runs.items():
        argmax_hits = 0
        ebpg_wins = 0
        for _image, box, _target, result in entries:
            roi = BBox(*box)
            argmax_hits += pointing_game_hit(result.saliency, roi)
            uniform = SaliencyMap(np.ones_like(result.saliency.values))
            ebpg_wins += ebpg(result.saliency, roi) > ebpg(uniform, roi)
        assert argmax_hits >= 18, f"{method}: argmax inside blob only {argmax_hits}/20"
        assert ebpg_wins >= 18, f"{method}: EBPG beat uniform only {ebpg_wins}/20"
    verdict(5, "saliency argmax in-box and EBPG > uniform in >= 18/20 runs per method")


# ---------------------------------------------------------------------------
# criterion 6: bit-level determinism across runs and worker counts


def test_criterion_6_determinism():
    start = time.perf_counter()
    backend = SyntheticBackend()
    image, box = seeded_blob(3)
    target = TargetSpec(synthetic_detect(image)[0], image_id="det")
    roi = BBox(*box)
    metric_cfg = MetricConfig(steps=20)

    configs = [
        ExplainerConfig(method=Method.DRISE, n_masks=200, rng_seed=7),
        ExplainerConfig(method=Method.DCLOSE, n_masks=160, dclose_levels=(20, 50), rng_seed=7),
    ]
    explainers = {Method.DRISE: explain_drise, Method.DCLOSE: explain_dclose}
    for cfg in configs:
        results = [
            explainers[cfg.method](backend, image, target, cfg, workers=workers)
            for workers in (1, 1, 4, 4)
        ]
        for other in results[1:]:
            assert np.array_equal(results[0].saliency.values, other.saliency.values), (
                f"{cfg.method}: saliency not bit-identical"
            )
        records = [
            evaluate_all(backend, image, result, target.detection, roi, metric_cfg).to_dict()
            for result in results[:2]
        ]
        assert records[0] | {"time_s": 0} == records[1] | {"time_s": 0}
    elapsed = time.perf_counter() - start
    assert elapsed < 120.0
    verdict(6, f"bit-identical saliency and records across reruns and workers 1 vs 4 ({elapsed:.1f}s)")


# ---------------------------------------------------------------------------
# criterion 7: gradient-based explainer unit behavior and runtime ordering


def test_criterion_7_gcame_behavior():
    image, box = seeded_blob(5)
    target = TargetSpec(synthetic_detect(image)[0], image_id="gcame")
    stride = 3.0
    center = target.detection.bbox.center
    capture = WhiteBoxCapture(
        "stage3",
        np.ones((1, 32, 32)),
        np.full((1, 32, 32), 0.5),
        stride,
        center,
    )
    cfg = ExplainerConfig(method=Method.GCAME, gcame_sigma_scale=0.5)
    result = explain_gcame(capture, (96, 96), target, cfg)

    sigma_img = cfg.gcame_sigma_scale * max(
        target.detection.bbox.width, target.detection.bbox.height
    )
    reference = gaussian_kernel(center, sigma_img, 96, 96).ravel()
    produced = result.saliency.values.ravel()
    cosine = float(
        np.dot(produced, reference) / (np.linalg.norm(produced) * np.linalg.norm(reference))
    )
    assert cosine > 0.999

    zero_grad = WhiteBoxCapture("stage3", np.ones((3, 32, 32)), np.zeros((3, 32, 32)), stride, center)
    constant = explain_gcame(zero_grad, (96, 96), target, cfg)
    assert np.array_equal(constant.saliency.values, np.ones((96, 96)))

    assert result.elapsed_s < 1.0
    backend = SyntheticBackend()
    drise_cfg = ExplainerConfig(method=Method.DRISE, n_masks=2000, rng_seed=1)
    drise_full = explain_drise(backend, image, target, drise_cfg)
    assert result.elapsed_s < drise_full.elapsed_s
    verdict(
        7,
        f"kernel cosine {cosine:.5f} > 0.999, zero-grad constant map, "
        f"{result.elapsed_s * 1e3:.1f}ms < mask-based {drise_full.elapsed_s:.2f}s",
    )


# ---------------------------------------------------------------------------
# criterion 8: harness round trip on a programmatic dataset


def test_criterion_8_harness_round_trip(tmp_path):
    start = time.perf_counter()
    ann_path, image_dir = make_coco_dataset(tmp_path, n_images=10, size=64)
    index = load_coco(ann_path, image_dir)
    cfg = BenchmarkConfig(
        explainer=ExplainerConfig(
            method=Method.DRISE, n_masks=48, rise_grid=6, dclose_levels=(8, 16), rng_seed=2
        ),
        metrics=MetricConfig(steps=10),
    )
    report = run_benchmark(
        index, [SyntheticBackend()], [Method.DRISE, Method.DCLOSE], cfg, sample_limit=10
    )
    assert len(report.records) == 20  # 10 instances x 2 methods
    out = tmp_path / "bundle"
    paths = write_report_bundle(report, out)
    for name in ("report.json", "report.csv", "spider_3axis.svg", "spider_all.svg"):
        assert paths[name].exists() and paths[name].stat().st_size > 0

    parsed = parse_table_csv(paths["report.csv"].read_text())
    for key, agg in report.aggregates.items():
        assert parsed[key]["Ins"] == agg.ins_auc
        assert parsed[key]["Del"] == agg.del_auc
        assert parsed[key]["OA"] == agg.oa
        assert parsed[key]["PG"] == agg.pg
        assert parsed[key]["EBPG"] == agg.ebpg
        assert parsed[key]["Sparsity"] == agg.sparsity
        assert parsed[key]["Time(s)"] == agg.time_s
        assert abs(agg.oa - (agg.ins_auc - agg.del_auc)) <= 1e-9
    elapsed = time.perf_counter() - start
    assert elapsed < 300.0
    verdict(8, f"10-image benchmark bundle written; CSV re-parse exact; OA identity holds ({elapsed:.1f}s)")


# ---------------------------------------------------------------------------
# criterion 9: wire protocol and tensor-bundle conformance


def test_criterion_9_protocol_conformance(tmp_path):
    start = time.perf_counter()
    image = blob_image(width=24, height=24, box=(2, 2, 20, 20))

    backend = SubprocessBackend([sys.executable, str(SCRIPT), "--mode", "ok"])
    descriptor = backend.descriptor()
    assert descriptor.name == "scripted" and descriptor.max_batch == 4
    detections = backend.detect_batch([image])[0]
    assert detections[0].bbox.as_tuple() == (2.0, 3.0, 12.0, 13.0)
    backend.close()

    with pytest.raises(ProtocolViolationError):
        SubprocessBackend([sys.executable, str(SCRIPT), "--mode", "bad-handshake"])

    malformed = SubprocessBackend([sys.executable, str(SCRIPT), "--mode", "malformed"])
    with pytest.raises(ProtocolViolationError):
        malformed.detect_batch([image])
    malformed.close()

    hung = SubprocessBackend([sys.executable, str(SCRIPT), "--mode", "hang"], timeout_s=1.0)
    with pytest.raises(BackendTimeoutError):
        hung.detect_batch([image])
    hung.close()

    with pytest.raises(BackendUnavailableError):
        SubprocessBackend([sys.executable, str(SCRIPT), "--mode", "die"])

    good = tmp_path / "good.odt"
    write_odt(
        good,
        {
            "features": np.ones((2, 4, 4)),
            "gradients": np.ones((2, 4, 4)),
            "stride": np.array(8.0),
            "center": np.array([8.0, 8.0]),
        },
    )
    load_whitebox_capture(good)
    truncated = tmp_path / "truncated.odt"
    truncated.write_bytes(good.read_bytes()[:-9])
    with pytest.raises(FormatError):
        load_whitebox_capture(truncated)
    nan_bundle = tmp_path / "nan.odt"
    bad = np.ones((2, 4, 4))
    bad[0, 0, 0] = np.nan
    write_odt(
        nan_bundle,
        {
            "features": np.ones((2, 4, 4)),
            "gradients": bad,
            "stride": np.array(8.0),
            "center": np.array([8.0, 8.0]),
        },
    )
    with pytest.raises(NonFiniteTensorError):
        load_whitebox_capture(nan_bundle)

    elapsed = time.perf_counter() - start
    assert elapsed < 10.0
    verdict(9, f"handshake/detect/malformed/timeout errors as specified; bad bundles rejected ({elapsed:.1f}s)")
