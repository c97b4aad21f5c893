"""Detector-ensemble scheduling and per-frame fusion.

Each detector source fires every ``stride_f`` frames starting at frame
``phase + 1``. Fusion gathers whatever fired at a frame and resolves
duplicate sightings of one object with greedy NMS; staggering the phases
lets a set of slow detectors cover many more frames than any one of them.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import Detection, DetectionSet, nms

__all__ = [
    "DetectorSource",
    "EnsembleSchedule",
    "FrameBundle",
    "active_sources",
    "fuse_frame",
    "DEFAULT_NMS_IOU",
]

DEFAULT_NMS_IOU = 0.7


@dataclass(frozen=True)
class DetectorSource:
    """One ensemble member: its firing schedule and its detection stream."""

    source_id: int
    name: str
    stride_f: int
    phase: int
    detections: DetectionSet

    def __post_init__(self) -> None:
        if self.stride_f < 1:
            raise ValueError(f"stride_f must be >= 1, got {self.stride_f}")
        if not 0 <= self.phase < self.stride_f:
            raise ValueError(
                f"phase must be in [0, stride_f), got phase={self.phase} stride={self.stride_f}"
            )

    def fires_at(self, frame: int) -> bool:
        offset = frame - 1 - self.phase
        return offset >= 0 and offset % self.stride_f == 0


@dataclass(frozen=True)
class EnsembleSchedule:
    sources: tuple[DetectorSource, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "sources", tuple(self.sources))
        ids = [s.source_id for s in self.sources]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate source ids: {sorted(ids)}")

    def max_stride(self) -> int:
        return max((s.stride_f for s in self.sources), default=1)

    def max_frame(self) -> int:
        return max((s.detections.max_frame() for s in self.sources), default=0)


@dataclass(frozen=True)
class FrameBundle:
    """Fused detections of one frame plus the sources that fired on it.

    ``active_sources`` lists every source that was scheduled, including ones
    that reported nothing - "fired and saw nothing" is evidence of absence,
    unlike a schedule-silent frame.
    """

    frame: int
    detections: tuple[Detection, ...]
    active_sources: tuple[int, ...]


def active_sources(schedule: EnsembleSchedule, frame: int) -> list[int]:
    """Ids of the sources scheduled to fire at ``frame``, ascending."""
    if frame < 1:
        raise ValueError(f"frame index must be >= 1, got {frame}")
    return sorted(s.source_id for s in schedule.sources if s.fires_at(frame))


def fuse_frame(
    schedule: EnsembleSchedule, frame: int, iou_threshold: float = DEFAULT_NMS_IOU
) -> FrameBundle:
    """Gather all detections of the sources active at ``frame`` and fuse
    overlapping sightings with NMS. Output is independent of source order."""
    active = active_sources(schedule, frame)
    if not active:
        return FrameBundle(frame=frame, detections=(), active_sources=())
    by_id = {s.source_id: s for s in schedule.sources}
    gathered: list[Detection] = []
    for sid in active:
        gathered.extend(by_id[sid].detections.at(frame))
    fused = nms(gathered, iou_threshold) if gathered else []
    return FrameBundle(frame=frame, detections=tuple(fused), active_sources=tuple(active))
