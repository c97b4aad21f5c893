"""Shared domain types and the bounding-box geometry used across the pipeline.

Boxes are kept in MOT convention (left, top, width, height) with real-valued
pixel coordinates; conversion to center form happens only inside the motion
model. All types here are immutable values after construction and every
operation is a pure function, so they are safe to copy between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import TYPE_CHECKING, Iterable, Iterator, Sequence

import numpy as np

if TYPE_CHECKING:  # pragma: no cover - type-only import, avoids a cycle
    from .kalman import KalmanTrackState

__all__ = [
    "BoundingBox",
    "Detection",
    "DetectionSet",
    "TrackStatus",
    "Track",
    "iou",
    "iou_matrix",
    "nms",
]


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box: top-left corner plus strictly positive size, pixels.

    Degenerate boxes (width or height <= 0) are rejected at construction
    rather than silently clamped.
    """

    left: float
    top: float
    width: float
    height: float

    def __post_init__(self) -> None:
        if not (self.width > 0.0 and self.height > 0.0):
            raise ValueError(
                f"non-positive box dimension: width={self.width}, height={self.height}"
            )

    @property
    def right(self) -> float:
        return self.left + self.width

    @property
    def bottom(self) -> float:
        return self.top + self.height

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center_x(self) -> float:
        return self.left + self.width / 2.0

    @property
    def center_y(self) -> float:
        return self.top + self.height / 2.0


@dataclass(frozen=True)
class Detection:
    """One detector observation: frame, box, confidence, and source label.

    Confidence is a real in [0, 1]; exactly -1 marks an unscored detection.
    """

    frame: int
    box: BoundingBox
    confidence: float = 1.0
    source_id: int = 0

    def __post_init__(self) -> None:
        if self.frame < 1:
            raise ValueError(f"frame index must be >= 1, got {self.frame}")
        c = self.confidence
        if not (c == -1.0 or 0.0 <= c <= 1.0):
            raise ValueError(f"confidence must be in [0, 1] or -1, got {c}")


class DetectionSet:
    """Detections grouped by frame index, preserving within-frame order."""

    __slots__ = ("_by_frame",)

    def __init__(self, detections: Iterable[Detection] = ()) -> None:
        by_frame: dict[int, list[Detection]] = {}
        for det in detections:
            by_frame.setdefault(det.frame, []).append(det)
        self._by_frame: dict[int, tuple[Detection, ...]] = {
            f: tuple(by_frame[f]) for f in sorted(by_frame)
        }

    def at(self, frame: int) -> tuple[Detection, ...]:
        return self._by_frame.get(frame, ())

    def frames(self) -> tuple[int, ...]:
        return tuple(self._by_frame)

    def max_frame(self) -> int:
        return max(self._by_frame, default=0)

    def __len__(self) -> int:
        return sum(len(ds) for ds in self._by_frame.values())

    def __iter__(self) -> Iterator[Detection]:
        for frame in self._by_frame:
            yield from self._by_frame[frame]


class TrackStatus(Enum):
    TENTATIVE = "tentative"
    CONFIRMED = "confirmed"
    DEAD = "dead"


_ALLOWED_TRANSITIONS = {
    (TrackStatus.TENTATIVE, TrackStatus.CONFIRMED),
    (TrackStatus.TENTATIVE, TrackStatus.DEAD),
    (TrackStatus.CONFIRMED, TrackStatus.DEAD),
}


@dataclass(frozen=True)
class Track:
    """One tracked object: identity, lifecycle counters, and filtered state.

    ``hits``/``misses`` are consecutive counts. ``history`` holds one
    (frame, box) entry per frame the track was alive; the tracker appends in
    strictly increasing frame order. Ids are never reused within a run.
    """

    id: int
    status: TrackStatus
    state: "KalmanTrackState"
    hits: int
    misses: int
    first_frame: int
    last_update_frame: int
    history: tuple[tuple[int, BoundingBox], ...] = ()

    def __post_init__(self) -> None:
        if self.id < 1:
            raise ValueError(f"track id must be >= 1, got {self.id}")
        if self.first_frame > self.last_update_frame:
            raise ValueError(
                f"first_frame {self.first_frame} > last_update_frame {self.last_update_frame}"
            )
        if self.hits < 0 or self.misses < 0:
            raise ValueError("hit/miss counters must be nonnegative")

    def with_status(self, new_status: TrackStatus) -> "Track":
        """Return a copy in ``new_status``; only forward transitions are legal."""
        if new_status is self.status:
            return self
        if (self.status, new_status) not in _ALLOWED_TRANSITIONS:
            raise ValueError(
                f"illegal status transition {self.status.value} -> {new_status.value}"
            )
        return replace(self, status=new_status)


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union of two boxes; symmetric, in [0, 1]."""
    inter_w = min(a.right, b.right) - max(a.left, b.left)
    inter_h = min(a.bottom, b.bottom) - max(a.top, b.top)
    if inter_w <= 0.0 or inter_h <= 0.0:
        return 0.0
    inter = inter_w * inter_h
    return inter / (a.area + b.area - inter)


def iou_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise IoU of boxes given as (N, 4) / (M, 4) arrays of (l, t, w, h).

    Tolerant of nonpositive sizes (e.g. raw predicted means): such boxes
    overlap nothing and score 0.
    """
    a = np.asarray(a, dtype=np.float64).reshape(-1, 4)
    b = np.asarray(b, dtype=np.float64).reshape(-1, 4)
    ar, ab_ = a[:, 0] + a[:, 2], a[:, 1] + a[:, 3]
    br, bb_ = b[:, 0] + b[:, 2], b[:, 1] + b[:, 3]
    inter_w = np.minimum(ar[:, None], br[None, :]) - np.maximum(a[:, None, 0], b[None, :, 0])
    inter_h = np.minimum(ab_[:, None], bb_[None, :]) - np.maximum(a[:, None, 1], b[None, :, 1])
    inter = np.maximum(inter_w, 0.0) * np.maximum(inter_h, 0.0)
    area_a = np.maximum(a[:, 2], 0.0) * np.maximum(a[:, 3], 0.0)
    area_b = np.maximum(b[:, 2], 0.0) * np.maximum(b[:, 3], 0.0)
    union = area_a[:, None] + area_b[None, :] - inter
    out = np.zeros_like(inter)
    np.divide(inter, union, out=out, where=union > 0.0)
    return out


def nms(dets: Sequence[Detection], iou_threshold: float) -> list[Detection]:
    """Greedy non-maximum suppression with a fixed, deterministic ordering.

    Detections are ranked by confidence descending, ties broken by larger
    area, then lower source_id, then box coordinates. A detection is kept iff
    its IoU with every already-kept detection is strictly below the threshold.
    All inputs must share one frame index.
    """
    if not 0.0 < iou_threshold <= 1.0:
        raise ValueError(f"iou_threshold must be in (0, 1], got {iou_threshold}")
    dets = list(dets)
    if len(dets) <= 1:
        return dets
    frames = {d.frame for d in dets}
    if len(frames) > 1:
        raise ValueError(f"nms input spans multiple frames: {sorted(frames)}")

    order = sorted(
        range(len(dets)),
        key=lambda i: (
            -dets[i].confidence,
            -dets[i].box.area,
            dets[i].source_id,
            dets[i].box.left,
            dets[i].box.top,
            dets[i].box.width,
            dets[i].box.height,
        ),
    )
    boxes = np.array(
        [(d.box.left, d.box.top, d.box.width, d.box.height) for d in dets]
    )
    overlaps = iou_matrix(boxes, boxes)
    kept: list[int] = []
    for i in order:
        row = overlaps[i]
        if all(row[j] < iou_threshold for j in kept):
            kept.append(i)
    return [dets[i] for i in kept]
