import math

import numpy as np
import pytest

from stridetrack import (
    BoundingBox,
    Detection,
    DetectionSet,
    DetectorSource,
    EnsembleSchedule,
    active_sources,
    fuse_frame,
)


def source(sid, stride, phase, dets=()):
    return DetectorSource(
        source_id=sid, name=f"s{sid}", stride_f=stride, phase=phase, detections=DetectionSet(dets)
    )


def det(frame, l, t, w, h, conf=1.0, source_id=0):
    return Detection(frame=frame, box=BoundingBox(l, t, w, h), confidence=conf, source_id=source_id)


class TestActiveSources:
    def test_stride_one_always_fires(self):
        sched = EnsembleSchedule((source(0, 1, 0),))
        assert all(active_sources(sched, f) == [0] for f in range(1, 51))

    def test_complementary_stride_two(self):
        sched = EnsembleSchedule((source(0, 2, 0), source(1, 2, 1)))
        for f in range(1, 41):
            active = active_sources(sched, f)
            assert active == ([0] if f % 2 == 1 else [1])

    def test_strides_two_and_three(self):
        # direct modular arithmetic over frames 1..20: both fire iff
        # frame-1 is divisible by both 2 and 3
        sched = EnsembleSchedule((source(0, 2, 0), source(1, 3, 0)))
        both = [f for f in range(1, 21) if active_sources(sched, f) == [0, 1]]
        expected = [f for f in range(1, 21) if (f - 1) % 2 == 0 and (f - 1) % 3 == 0]
        assert expected == [1, 7, 13, 19]
        assert both == expected

    def test_phase_delays_first_firing(self):
        sched = EnsembleSchedule((source(0, 4, 2),))
        fired = [f for f in range(1, 14) if active_sources(sched, f) == [0]]
        assert fired == [3, 7, 11]

    def test_invalid_frame(self):
        sched = EnsembleSchedule((source(0, 1, 0),))
        with pytest.raises(ValueError):
            active_sources(sched, 0)

    def test_lcm_window_fire_counts(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            strides = [int(rng.integers(1, 7)) for _ in range(3)]
            phases = [int(rng.integers(0, s)) for s in strides]
            sched = EnsembleSchedule(
                tuple(source(i, s, p) for i, (s, p) in enumerate(zip(strides, phases)))
            )
            window = math.lcm(*strides)
            start = max(phases) + 1  # past every source's first firing
            counts = {i: 0 for i in range(3)}
            for f in range(start, start + window):
                for sid in active_sources(sched, f):
                    counts[sid] += 1
            for i, s in enumerate(strides):
                assert counts[i] == window // s

    def test_duplicate_source_ids_rejected(self):
        with pytest.raises(ValueError, match="duplicate source ids"):
            EnsembleSchedule((source(0, 1, 0), source(0, 2, 0)))

    def test_phase_must_be_within_stride(self):
        with pytest.raises(ValueError, match="phase"):
            source(0, 2, 2)


class TestFuseFrame:
    def test_no_source_due_gives_empty_bundle(self):
        sched = EnsembleSchedule((source(0, 2, 1),))
        bundle = fuse_frame(sched, 1, 0.7)
        assert bundle.detections == ()
        assert bundle.active_sources == ()

    def test_scheduled_but_empty_source_counts_as_fired(self):
        sched = EnsembleSchedule((source(0, 1, 0),))  # no rows at all
        bundle = fuse_frame(sched, 5, 0.7)
        assert bundle.active_sources == (0,)
        assert bundle.detections == ()

    def test_same_object_from_two_sources_keeps_higher_confidence(self):
        a = det(1, 0, 0, 10, 10, conf=0.8, source_id=0)
        b = det(1, 0.5, 0, 10, 10, conf=0.6, source_id=1)  # IoU ~0.9
        sched = EnsembleSchedule((source(0, 1, 0, [a]), source(1, 1, 0, [b])))
        bundle = fuse_frame(sched, 1, 0.7)
        assert bundle.detections == (a,)
        assert bundle.active_sources == (0, 1)

    def test_disjoint_objects_both_kept(self):
        a = det(1, 0, 0, 10, 10, conf=0.8, source_id=0)
        b = det(1, 100, 0, 10, 10, conf=0.6, source_id=1)
        sched = EnsembleSchedule((source(0, 1, 0, [a]), source(1, 1, 0, [b])))
        bundle = fuse_frame(sched, 1, 0.7)
        assert set(bundle.detections) == {a, b}

    def test_fusion_independent_of_source_order(self):
        rng = np.random.default_rng(1)
        dets_a = [det(1, rng.integers(0, 50), rng.integers(0, 50), 12, 12, conf=float(rng.integers(1, 100)) / 100, source_id=0) for _ in range(6)]
        dets_b = [det(1, rng.integers(0, 50), rng.integers(0, 50), 12, 12, conf=float(rng.integers(1, 100)) / 100, source_id=1) for _ in range(6)]
        fwd = EnsembleSchedule((source(0, 1, 0, dets_a), source(1, 1, 0, dets_b)))
        rev = EnsembleSchedule((source(1, 1, 0, dets_b), source(0, 1, 0, dets_a)))
        assert fuse_frame(fwd, 1, 0.5).detections == fuse_frame(rev, 1, 0.5).detections

    def test_fused_detections_originate_from_sources(self):
        rng = np.random.default_rng(2)
        dets_a = [det(1, rng.integers(0, 80), rng.integers(0, 80), 15, 15, conf=0.9, source_id=0) for _ in range(5)]
        dets_b = [det(1, rng.integers(0, 80), rng.integers(0, 80), 15, 15, conf=0.7, source_id=1) for _ in range(5)]
        sched = EnsembleSchedule((source(0, 1, 0, dets_a), source(1, 1, 0, dets_b)))
        bundle = fuse_frame(sched, 1, 0.6)
        pool = set(dets_a) | set(dets_b)
        for d in bundle.detections:
            assert d in pool
        for d in bundle.detections:
            assert d.source_id in bundle.active_sources
