"""Boxes, overlap, and non-maximum suppression.

Detectors report axis-aligned boxes in MOT convention (left, top, width,
height). IoU measures how much two boxes agree; NMS collapses a pile of
overlapping reports into one detection per object.
"""

from stridetrack import BoundingBox, Detection, iou, nms

a = BoundingBox(left=0, top=0, width=10, height=10)
b = BoundingBox(left=5, top=0, width=10, height=10)  # half-shifted copy
c = BoundingBox(left=30, top=30, width=10, height=10)  # far away

print("IoU of a box with itself:   ", iou(a, a))
print("IoU of half-shifted boxes:  ", iou(a, b))
print("IoU of disjoint boxes:      ", iou(a, c))

# Three detectors saw the same object, plus one clean sighting elsewhere.
reports = [
    Detection(frame=1, box=BoundingBox(100, 100, 40, 60), confidence=0.92, source_id=0),
    Detection(frame=1, box=BoundingBox(102, 99, 40, 61), confidence=0.85, source_id=1),
    Detection(frame=1, box=BoundingBox(98, 101, 41, 60), confidence=0.80, source_id=2),
    Detection(frame=1, box=BoundingBox(300, 200, 40, 60), confidence=0.70, source_id=1),
]

kept = nms(reports, iou_threshold=0.7)
print(f"\n{len(reports)} raw reports -> {len(kept)} after NMS:")
for det in kept:
    box = det.box
    print(f"  conf {det.confidence:.2f} from source {det.source_id} at ({box.left:.0f}, {box.top:.0f})")
