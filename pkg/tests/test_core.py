import numpy as np
import pytest
from hypothesis import given, strategies as st

from odexai.core import BBox, Detection, ImageBuffer, SaliencyMap, cosine_sim, iou
from odexai.errors import ZeroVectorError


def grid_iou(a: BBox, b: BBox) -> float:
    """Independent oracle: count unit cells fully inside each integer-corner box."""

    def cells(box):
        return {
            (i, j)
            for i in range(int(box.y1), int(box.y2))
            for j in range(int(box.x1), int(box.x2))
        }

    ca, cb = cells(a), cells(b)
    return len(ca & cb) / len(ca | cb)


class TestIou:
    def test_identity(self):
        box = BBox(0, 0, 10, 10)
        assert iou(box, box) == 1.0

    def test_disjoint(self):
        assert iou(BBox(0, 0, 10, 10), BBox(20, 20, 30, 30)) == 0.0

    def test_half_overlap_matches_cell_counting_oracle(self):
        a = BBox(0, 0, 10, 10)
        b = BBox(5, 0, 15, 10)
        expected = grid_iou(a, b)
        assert expected == pytest.approx(50 / 150)
        assert iou(a, b) == pytest.approx(expected, abs=1e-12)
        assert iou(a, b) == pytest.approx(0.333333, abs=1e-6)

    def test_touching_edges_count_as_disjoint(self):
        assert iou(BBox(0, 0, 10, 10), BBox(10, 0, 20, 10)) == 0.0


boxes = st.builds(
    lambda x, y, w, h: BBox(x, y, x + w, y + h),
    st.floats(0, 100),
    st.floats(0, 100),
    st.floats(0.1, 50),
    st.floats(0.1, 50),
)


@given(boxes, boxes)
def test_iou_symmetric(a, b):
    assert iou(a, b) == pytest.approx(iou(b, a), abs=1e-15)


@given(boxes)
def test_iou_self_is_exactly_one(box):
    assert iou(box, box) == 1.0


@given(boxes, boxes)
def test_iou_in_unit_interval(a, b):
    assert 0.0 <= iou(a, b) <= 1.0


class TestCosine:
    def test_parallel(self):
        assert cosine_sim([1, 0], [2, 0]) == pytest.approx(1.0)

    def test_orthogonal(self):
        assert cosine_sim([1, 0], [0, 1]) == pytest.approx(0.0, abs=1e-15)

    def test_against_dot_product_oracle(self):
        u, v = np.array([0.6, 0.8]), np.array([1.0, 0.0])
        expected = float(u @ v) / (np.sqrt(u @ u) * np.sqrt(v @ v))
        assert expected == pytest.approx(0.6)
        assert cosine_sim(u, v) == pytest.approx(expected, abs=1e-12)

    def test_zero_vector_raises(self):
        with pytest.raises(ZeroVectorError):
            cosine_sim([0.0, 0.0], [1.0, 0.0])

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            cosine_sim([1.0], [1.0, 2.0])


@given(
    st.lists(st.floats(-10, 10), min_size=2, max_size=6),
    st.floats(1e-3, 1e3),
)
def test_cosine_scale_invariant(values, k):
    u = np.array(values)
    if np.linalg.norm(u) == 0:
        return
    v = u + 1.0  # any companion vector with the same length
    if np.linalg.norm(v) == 0:
        return
    assert cosine_sim(u, k * v) == pytest.approx(cosine_sim(u, v), abs=1e-12)


class TestTypes:
    def test_bbox_rejects_inverted_corners(self):
        with pytest.raises(ValueError):
            BBox(10, 0, 5, 10)

    def test_bbox_rejects_negative_coordinates(self):
        with pytest.raises(ValueError):
            BBox(-1, 0, 5, 10)

    def test_bbox_rejects_nan(self):
        with pytest.raises(ValueError):
            BBox(float("nan"), 0, 5, 10)

    def test_pixel_center_rule(self):
        box = BBox(2, 3, 5, 6)
        assert box.contains_pixel(3, 2)
        assert not box.contains_pixel(3, 5)  # center 5.5 is past x2
        mask = box.pixel_mask(8, 8)
        assert mask.sum() == 9

    def test_detection_label_is_argmax(self):
        det = Detection(BBox(0, 0, 1, 1), 0.5, np.array([0.1, 0.7, 0.2]))
        assert det.label == 1

    def test_detection_rejects_out_of_range_probs(self):
        with pytest.raises(ValueError):
            Detection(BBox(0, 0, 1, 1), 0.5, np.array([0.5, 1.5]))

    @pytest.mark.parametrize("bad", [float("nan"), float("inf"), -float("inf")])
    def test_saliency_rejects_non_finite(self, bad):
        values = np.ones((4, 4))
        values[1, 2] = bad
        with pytest.raises(ValueError):
            SaliencyMap(values)

    def test_saliency_values_are_immutable(self):
        saliency = SaliencyMap(np.ones((2, 2)))
        with pytest.raises(ValueError):
            saliency.values[0, 0] = 2.0

    def test_image_buffer_range_check(self):
        with pytest.raises(ValueError):
            ImageBuffer(np.full((2, 2, 3), 1.5))
