"""Staggered detector schedules.

Running a heavy detector on every frame is what makes most trackers slow.
Here each source fires every `stride` frames at its own phase offset; a
staggered pair of stride-2 detectors covers every frame at half the
per-detector cost. The tracker's motion model coasts across whatever gaps
remain.
"""

from stridetrack import DetectionSet, DetectorSource, EnsembleSchedule, active_sources

def show(schedule, frames=12):
    names = {s.source_id: s.name for s in schedule.sources}
    print("frame: " + " ".join(f"{f:>2}" for f in range(1, frames + 1)))
    for sid in sorted(names):
        marks = ["x" if sid in active_sources(schedule, f) else "." for f in range(1, frames + 1)]
        print(f"{names[sid]:>5}: " + " ".join(f"{m:>2}" for m in marks))
    covered = sum(1 for f in range(1, frames + 1) if active_sources(schedule, f))
    print(f"frames with at least one detector: {covered}/{frames}\n")

print("One detector, stride 3 (fires on a third of the frames):")
show(EnsembleSchedule((DetectorSource(0, "a", 3, 0, DetectionSet()),)))

print("Two stride-2 detectors, phases 0 and 1 (full coverage, half load each):")
show(
    EnsembleSchedule(
        (
            DetectorSource(0, "a", 2, 0, DetectionSet()),
            DetectorSource(1, "b", 2, 1, DetectionSet()),
        )
    )
)

print("Mixed strides 2 and 3 overlap only where the schedules align:")
show(
    EnsembleSchedule(
        (
            DetectorSource(0, "a", 2, 0, DetectionSet()),
            DetectorSource(1, "b", 3, 0, DetectionSet()),
        )
    )
)
