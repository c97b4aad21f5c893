"""Matching detections to tracks with a gated optimal assignment.

Each track-detection pair is priced by the negative log likelihood of the
detection under the track's predictive Gaussian; pairs that fail the
chi-square gate are inadmissible. The solver then picks the cheapest
globally consistent pairing, which resolves near-swaps that a greedy
nearest-neighbour matcher would get wrong.
"""

import numpy as np

from stridetrack import BoundingBox, DEFAULT_GATE_CHI2, Detection, MotionModel, associate, initiate, predict, update
from stridetrack.association import build_cost_matrix
from stridetrack.core import Track, TrackStatus

model = MotionModel()


def track_with_velocity(tid, left, vx):
    state = initiate(Detection(frame=1, box=BoundingBox(left, 100, 40, 60)), model)
    for frame in range(2, 6):  # feed a few frames so the filter learns vx
        state = predict(state, model, 1)
        state = update(state, Detection(frame=frame, box=BoundingBox(left + vx * (frame - 1), 100, 40, 60)), model)
    state = predict(state, model, 1)
    return Track(id=tid, status=TrackStatus.CONFIRMED, state=state, hits=5, misses=0,
                 first_frame=1, last_update_frame=5)


# Two objects about to pass each other: A moves right, B moves left.
track_a = track_with_velocity(1, 100.0, +6.0)
track_b = track_with_velocity(2, 180.0, -6.0)
print(f"track A predicts cx = {track_a.state.mean[0]:.0f} (moving right)")
print(f"track B predicts cx = {track_b.state.mean[0]:.0f} (moving left)")

detections = [
    Detection(frame=6, box=BoundingBox(track_b.state.mean[0] - 20, 100, 40, 60)),
    Detection(frame=6, box=BoundingBox(track_a.state.mean[0] - 20, 100, 40, 60)),
]

costs = build_cost_matrix([track_a, track_b], detections, DEFAULT_GATE_CHI2, model)
with np.printoptions(precision=1, suppress=True):
    print("\ncost matrix (rows tracks, cols detections, inf = gated out):")
    print(costs.values)

result = associate([track_a, track_b], detections, DEFAULT_GATE_CHI2, model)
for t, d in result.matches:
    tid = (track_a, track_b)[t].id
    print(f"track {tid} <- detection {d} at cx {detections[d].box.center_x:.0f}")
