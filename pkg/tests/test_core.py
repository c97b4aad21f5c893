import numpy as np
import pytest

from stridetrack import BoundingBox, Detection, DetectionSet, TrackStatus, iou, iou_matrix, nms
from oracles import raster_iou


def random_box(rng, max_size=100):
    return BoundingBox(
        left=float(rng.integers(0, 50)),
        top=float(rng.integers(0, 50)),
        width=float(rng.integers(1, max_size + 1)),
        height=float(rng.integers(1, max_size + 1)),
    )


class TestBoundingBox:
    def test_rejects_degenerate(self):
        with pytest.raises(ValueError, match="non-positive box dimension"):
            BoundingBox(0, 0, -5, 10)
        with pytest.raises(ValueError, match="non-positive box dimension"):
            BoundingBox(0, 0, 10, 0)

    def test_derived_geometry(self):
        b = BoundingBox(2, 3, 10, 20)
        assert (b.right, b.bottom, b.area) == (12, 23, 200)
        assert (b.center_x, b.center_y) == (7, 13)


class TestIoU:
    def test_identity(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            b = random_box(rng)
            assert iou(b, b) == 1.0

    def test_disjoint(self):
        assert iou(BoundingBox(0, 0, 10, 10), BoundingBox(20, 20, 5, 5)) == 0.0

    def test_half_overlap_is_one_third(self):
        # intersection 50, union 150 (pixel-count oracle agrees)
        a = BoundingBox(0, 0, 10, 10)
        b = BoundingBox(5, 0, 10, 10)
        assert iou(a, b) == pytest.approx(1 / 3, abs=1e-12)
        assert raster_iou((0, 0, 10, 10), (5, 0, 10, 10)) == pytest.approx(1 / 3, abs=1e-12)

    def test_symmetry(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            a, b = random_box(rng), random_box(rng)
            assert iou(a, b) == iou(b, a)

    def test_bounds_and_identity_condition(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            a, b = random_box(rng), random_box(rng)
            v = iou(a, b)
            assert 0.0 <= v <= 1.0
            if v == 1.0:
                assert a == b

    def test_agrees_with_raster_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(300):
            a, b = random_box(rng), random_box(rng)
            expected = raster_iou(
                (a.left, a.top, a.width, a.height), (b.left, b.top, b.width, b.height)
            )
            assert iou(a, b) == pytest.approx(expected, abs=1e-6)

    def test_matrix_matches_scalar(self):
        rng = np.random.default_rng(4)
        boxes_a = [random_box(rng) for _ in range(7)]
        boxes_b = [random_box(rng) for _ in range(5)]
        arr_a = np.array([(b.left, b.top, b.width, b.height) for b in boxes_a])
        arr_b = np.array([(b.left, b.top, b.width, b.height) for b in boxes_b])
        mat = iou_matrix(arr_a, arr_b)
        for i, a in enumerate(boxes_a):
            for j, b in enumerate(boxes_b):
                assert mat[i, j] == pytest.approx(iou(a, b), abs=1e-12)

    def test_matrix_tolerates_degenerate_sizes(self):
        mat = iou_matrix(np.array([[0.0, 0.0, -3.0, 5.0]]), np.array([[0.0, 0.0, 4.0, 4.0]]))
        assert mat[0, 0] == 0.0


class TestDetection:
    def test_validation(self):
        box = BoundingBox(0, 0, 5, 5)
        with pytest.raises(ValueError, match="frame index"):
            Detection(frame=0, box=box)
        with pytest.raises(ValueError, match="confidence"):
            Detection(frame=1, box=box, confidence=1.5)
        with pytest.raises(ValueError, match="confidence"):
            Detection(frame=1, box=box, confidence=-0.3)
        assert Detection(frame=1, box=box, confidence=-1).confidence == -1

    def test_detection_set_groups_by_frame(self):
        box = BoundingBox(0, 0, 5, 5)
        dets = [Detection(2, box), Detection(1, box), Detection(2, box, 0.5)]
        ds = DetectionSet(dets)
        assert len(ds) == 3
        assert ds.frames() == (1, 2)
        assert ds.max_frame() == 2
        assert [d.frame for d in ds] == [1, 2, 2]
        # every detection sits under the frame index matching its field
        for frame in ds.frames():
            assert all(d.frame == frame for d in ds.at(frame))
        assert ds.at(3) == ()


class TestTrackStatus:
    def test_members(self):
        assert {s.name for s in TrackStatus} == {"TENTATIVE", "CONFIRMED", "DEAD"}


class TestNms:
    def box(self, l, t, w, h):
        return BoundingBox(l, t, w, h)

    def test_single_detection_is_kept(self):
        d = Detection(1, self.box(0, 0, 10, 10), 0.5)
        assert nms([d], 0.5) == [d]

    def test_identical_boxes_keep_higher_confidence(self):
        hi = Detection(1, self.box(0, 0, 10, 10), 0.9)
        lo = Detection(1, self.box(0, 0, 10, 10), 0.8)
        assert nms([lo, hi], 0.5) == [hi]

    def test_chain_case(self):
        # C overlaps A at IoU 0.6 (raster oracle on a half-pixel grid) and
        # is disjoint from B, so greedy keeps {A, B} and drops C.
        a = Detection(1, self.box(0, 0, 10, 10), 0.9)
        b = Detection(1, self.box(50, 0, 10, 10), 0.8)
        c = Detection(1, self.box(0, 2.5, 10, 10), 0.7)
        assert raster_iou((0, 0, 10, 10), (0, 2.5, 10, 10), scale=2) == pytest.approx(0.6)
        assert raster_iou((0, 0, 10, 10), (50, 0, 10, 10)) == 0.0
        assert nms([a, b, c], 0.5) == [a, b]

    def test_empty_input(self):
        assert nms([], 0.5) == []

    def test_mixed_frames_rejected(self):
        d1 = Detection(1, self.box(0, 0, 10, 10))
        d2 = Detection(2, self.box(0, 0, 10, 10))
        with pytest.raises(ValueError, match="multiple frames"):
            nms([d1, d2], 0.5)

    def _random_dets(self, rng, n):
        return [
            Detection(
                frame=1,
                box=BoundingBox(
                    float(rng.integers(0, 60)),
                    float(rng.integers(0, 60)),
                    float(rng.integers(5, 40)),
                    float(rng.integers(5, 40)),
                ),
                confidence=float(rng.integers(0, 101)) / 100.0,
                source_id=int(rng.integers(0, 3)),
            )
            for _ in range(n)
        ]

    def test_antichain_under_threshold(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            kept = nms(self._random_dets(rng, 12), 0.5)
            for i in range(len(kept)):
                for j in range(i + 1, len(kept)):
                    assert iou(kept[i].box, kept[j].box) < 0.5

    def test_idempotent(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            once = nms(self._random_dets(rng, 12), 0.4)
            assert nms(once, 0.4) == once

    def test_input_order_invariance(self):
        rng = np.random.default_rng(7)
        dets = self._random_dets(rng, 10)
        reference = nms(dets, 0.5)
        for _ in range(10):
            shuffled = list(dets)
            rng.shuffle(shuffled)
            assert nms(shuffled, 0.5) == reference

    def test_tie_break_prefers_larger_area_then_lower_source(self):
        big = Detection(1, self.box(0, 0, 12, 12), 0.8, source_id=2)
        small = Detection(1, self.box(1, 1, 10, 10), 0.8, source_id=0)
        assert nms([small, big], 0.5) == [big]
        twin_a = Detection(1, self.box(0, 0, 10, 10), 0.8, source_id=1)
        twin_b = Detection(1, self.box(0, 0, 10, 10), 0.8, source_id=0)
        assert nms([twin_a, twin_b], 0.5) == [twin_b]
