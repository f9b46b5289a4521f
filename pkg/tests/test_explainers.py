import math

import numpy as np
import pytest

from odexai.core import BBox
from odexai.detectors import WhiteBoxCapture, synthetic_detect
from odexai.errors import CaptureMismatchError
from odexai.explainers import (
    ExplainerConfig,
    FusionMode,
    Method,
    TargetSpec,
    config_digest,
    drise_similarity,
    explain_dclose,
    explain_drise,
    explain_gcame,
    gaussian_kernel,
    load_saliency,
    rise_mask_array,
    save_explanation,
    segment_mask_array,
)
from odexai.explainers.gcame import gcame_raw_map
from odexai.imageproc import normalize_array, slic_segment
from conftest import blob_image, make_detection

BLOB_BOX = (20, 24, 60, 64)


def blob_target(image):
    detections = synthetic_detect(image)
    assert len(detections) == 1
    return TargetSpec(detections[0], image_id="blob")


class TestDriseSimilarity:
    def test_identical_target_scores_one(self):
        det = make_detection((0, 0, 10, 10), objectness=1.0)
        assert drise_similarity(det, det) == pytest.approx(1.0)

    def test_disjoint_boxes_score_zero(self):
        a = make_detection((0, 0, 10, 10))
        b = make_detection((20, 20, 30, 30))
        assert drise_similarity(a, b) == 0.0

    def test_product_of_oracle_checked_factors(self):
        target = make_detection((0, 0, 10, 10), objectness=1.0, probs=(1.0, 0.0))
        proposal = make_detection((5, 0, 15, 10), objectness=0.9, probs=(0.6, 0.8))
        # iou 1/3, cosine 0.6, objectness 0.9
        assert drise_similarity(target, proposal) == pytest.approx(0.18, abs=1e-9)

    def test_zero_probability_vector_counts_as_zero(self):
        target = make_detection((0, 0, 10, 10), probs=(1.0, 0.0))
        proposal = make_detection((0, 0, 10, 10), probs=(0.0, 0.0))
        assert drise_similarity(target, proposal) == 0.0


class TestExplainDrise:
    def test_single_uniform_mask_normalizes_to_ones(self, synthetic_backend):
        image = blob_image()
        cfg = ExplainerConfig(
            method=Method.DRISE, n_masks=1, rise_grid=2, rise_p=1.0 - 1e-12, rng_seed=5
        )
        mask = rise_mask_array(cfg.rng_seed, 0, cfg.rise_grid, cfg.rise_p, 96, 96)
        assert np.array_equal(mask, np.ones((96, 96)))  # Bernoulli(~1) grid
        result = explain_drise(synthetic_backend, image, blob_target(image), cfg)
        assert np.array_equal(result.saliency.values, np.ones((96, 96)))

    def test_argmax_lands_inside_blob(self, synthetic_backend):
        image = blob_image()
        cfg = ExplainerConfig(method=Method.DRISE, n_masks=100, rise_grid=8, rng_seed=3)
        result = explain_drise(synthetic_backend, image, blob_target(image), cfg)
        row, col = np.unravel_index(np.argmax(result.saliency.values), (96, 96))
        x1, y1, x2, y2 = BLOB_BOX
        assert x1 <= col < x2 and y1 <= row < y2

    def test_bit_identical_across_runs_and_workers(self, synthetic_backend):
        image = blob_image()
        cfg = ExplainerConfig(method=Method.DRISE, n_masks=96, rise_grid=8, rng_seed=11)
        target = blob_target(image)
        serial = explain_drise(synthetic_backend, image, target, cfg, workers=1)
        again = explain_drise(synthetic_backend, image, target, cfg, workers=1)
        threaded = explain_drise(synthetic_backend, image, target, cfg, workers=4)
        assert np.array_equal(serial.saliency.values, again.saliency.values)
        assert np.array_equal(serial.saliency.values, threaded.saliency.values)

    def test_no_nan_inf_and_unit_range(self, synthetic_backend):
        image = blob_image()
        cfg = ExplainerConfig(method=Method.DRISE, n_masks=40, rise_grid=6, rng_seed=2)
        values = explain_drise(synthetic_backend, image, blob_target(image), cfg).saliency.values
        assert np.all(np.isfinite(values))
        assert values.min() >= 0.0 and values.max() <= 1.0

    def test_wrong_method_rejected(self, synthetic_backend):
        cfg = ExplainerConfig(method=Method.DCLOSE)
        with pytest.raises(ValueError):
            explain_drise(synthetic_backend, blob_image(), blob_target(blob_image()), cfg)


class TestExplainDclose:
    def test_single_mask_reduces_to_normalized_mask(self, synthetic_backend):
        image = blob_image()
        cfg = ExplainerConfig(method=Method.DCLOSE, n_masks=1, dclose_levels=(8,), rng_seed=4)
        segmentation = slic_segment(image, 8)
        mask = segment_mask_array(4, 0, 0, segmentation.labels, segmentation.segment_count)
        target = blob_target(image)
        # The mask must leave enough blob visible for a positive weight,
        # which the density then cancels on covered pixels.
        from odexai.imageproc import apply_mask_array
        from odexai.core import ImageBuffer

        masked = ImageBuffer(apply_mask_array(image.pixels, mask, np.zeros_like(image.pixels)))
        weight = max(
            (drise_similarity(target.detection, d) for d in synthetic_detect(masked)),
            default=0.0,
        )
        assert weight > 0.0
        result = explain_dclose(synthetic_backend, image, target, cfg)
        assert np.array_equal(result.saliency.values, normalize_array(mask))

    def test_uncovered_pixels_are_zero(self, synthetic_backend):
        image = blob_image()
        cfg = ExplainerConfig(method=Method.DCLOSE, n_masks=1, dclose_levels=(8,), rng_seed=4)
        segmentation = slic_segment(image, 8)
        mask = segment_mask_array(4, 0, 0, segmentation.labels, segmentation.segment_count)
        result = explain_dclose(synthetic_backend, image, blob_target(image), cfg)
        assert np.all(result.saliency.values[mask == 0.0] == 0.0)

    def test_argmax_lands_inside_blob(self, synthetic_backend):
        image = blob_image()
        cfg = ExplainerConfig(
            method=Method.DCLOSE, n_masks=80, dclose_levels=(20, 50), rng_seed=6
        )
        result = explain_dclose(synthetic_backend, image, blob_target(image), cfg)
        row, col = np.unravel_index(np.argmax(result.saliency.values), (96, 96))
        x1, y1, x2, y2 = BLOB_BOX
        assert x1 <= col < x2 and y1 <= row < y2

    def test_bit_identical_across_runs_and_workers(self, synthetic_backend):
        image = blob_image()
        cfg = ExplainerConfig(
            method=Method.DCLOSE, n_masks=80, dclose_levels=(20, 50), rng_seed=8
        )
        target = blob_target(image)
        serial = explain_dclose(synthetic_backend, image, target, cfg, workers=1)
        threaded = explain_dclose(synthetic_backend, image, target, cfg, workers=4)
        assert np.array_equal(serial.saliency.values, threaded.saliency.values)

    def test_density_covers_every_pixel_with_defaults(self):
        image = blob_image()
        segmentation = slic_segment(image, 20)
        density = np.zeros((96, 96))
        for i in range(100):  # 400 default masks / 4 levels
            density += segment_mask_array(0, 0, i, segmentation.labels, segmentation.segment_count)
        assert np.all(density > 0)

    def test_mean_fusion_mode(self, synthetic_backend):
        image = blob_image()
        cfg = ExplainerConfig(
            method=Method.DCLOSE,
            n_masks=40,
            dclose_levels=(20, 50),
            rng_seed=6,
            dclose_fusion=FusionMode.MEAN,
        )
        result = explain_dclose(synthetic_backend, image, blob_target(image), cfg)
        assert np.all(np.isfinite(result.saliency.values))


class TestGaussianKernel:
    def test_origin_value(self):
        kernel = gaussian_kernel((3.0, 2.0), 1.0, 7, 5)
        assert kernel[2, 3] == pytest.approx(1.0 / (2.0 * math.pi), abs=1e-12)

    def test_unit_distance_matches_precise_value(self):
        kernel = gaussian_kernel((3.0, 2.0), 1.0, 7, 5)
        expected = math.exp(-0.5) / (2.0 * math.pi)
        assert expected == pytest.approx(0.0965, abs=1e-4)
        assert kernel[2, 4] == pytest.approx(expected, abs=1e-12)

    def test_radial_symmetry(self):
        kernel = gaussian_kernel((4.0, 3.0), 1.7, 9, 7)
        assert kernel[3, 6] == pytest.approx(kernel[3, 2], abs=1e-15)
        assert kernel[5, 4] == pytest.approx(kernel[1, 4], abs=1e-15)


def make_capture(features, gradients, stride=8.0, center=(40.0, 44.0)):
    return WhiteBoxCapture("layer", features, gradients, stride, center)


class TestExplainGcame:
    def test_zero_gradients_give_constant_map(self):
        capture = make_capture(np.ones((3, 12, 12)), np.zeros((3, 12, 12)))
        target = blob_target(blob_image())
        cfg = ExplainerConfig(method=Method.GCAME)
        assert np.array_equal(gcame_raw_map(capture, target, cfg.gcame_sigma_scale), np.zeros((12, 12)))
        result = explain_gcame(capture, (96, 96), target, cfg)
        assert np.array_equal(result.saliency.values, np.ones((96, 96)))

    def test_single_positive_channel_proportional_to_kernel(self):
        capture = make_capture(np.ones((1, 12, 12)), np.full((1, 12, 12), 0.5))
        target = blob_target(blob_image())
        cfg = ExplainerConfig(method=Method.GCAME, gcame_sigma_scale=2.0)
        raw = gcame_raw_map(capture, target, cfg.gcame_sigma_scale)
        box = target.detection.bbox
        sigma = 2.0 * max(box.width, box.height) / 8.0
        center = (capture.target_center[0] / 8.0, capture.target_center[1] / 8.0)
        kernel = gaussian_kernel(center, sigma, 12, 12)
        assert np.allclose(raw, 0.5 * kernel, atol=1e-15)

    def test_negative_only_channels_rectify_to_zero(self):
        capture = make_capture(np.ones((2, 10, 10)), np.full((2, 10, 10), -1.0))
        target = blob_target(blob_image())
        raw = gcame_raw_map(capture, target, 0.25)
        assert np.array_equal(raw, np.zeros((10, 10)))

    def test_center_outside_grid_rejected(self):
        capture = make_capture(np.ones((1, 4, 4)), np.ones((1, 4, 4)), stride=8.0, center=(90.0, 20.0))
        with pytest.raises(CaptureMismatchError):
            gcame_raw_map(capture, blob_target(blob_image()), 0.25)

    def test_faster_than_mask_based_explainer(self, synthetic_backend):
        image = blob_image()
        target = blob_target(image)
        capture = make_capture(np.ones((4, 12, 12)), np.full((4, 12, 12), 0.3))
        gcame = explain_gcame(capture, (96, 96), target, ExplainerConfig(method=Method.GCAME))
        drise = explain_drise(
            synthetic_backend, image, target, ExplainerConfig(method=Method.DRISE, n_masks=64)
        )
        assert gcame.elapsed_s < drise.elapsed_s


class TestPersistence:
    def test_pgm_sidecar_round_trip(self, tmp_path, synthetic_backend):
        image = blob_image()
        cfg = ExplainerConfig(method=Method.DRISE, n_masks=16, rise_grid=4, rng_seed=1)
        result = explain_drise(synthetic_backend, image, blob_target(image), cfg)
        pgm_path, sidecar_path = save_explanation(
            result, tmp_path, image_id="blob", target_bbox=BBox(*BLOB_BOX)
        )
        loaded = load_saliency(pgm_path)
        assert loaded.values == pytest.approx(result.saliency.values, abs=1.0 / 65535)
        sidecar = sidecar_path.read_text()
        assert "drise" in sidecar and config_digest(cfg) in sidecar

    def test_digest_changes_with_config(self):
        a = ExplainerConfig(method=Method.DRISE, n_masks=100)
        b = ExplainerConfig(method=Method.DRISE, n_masks=101)
        assert config_digest(a) != config_digest(b)
        assert config_digest(a) == config_digest(ExplainerConfig(method=Method.DRISE, n_masks=100))
