"""The constant-velocity filter behind every track.

A track's state is a Gaussian over (cx, cy, w, h) and their velocities.
Prediction moves the mean along the velocity and inflates the covariance;
an update pulls the mean toward the measurement and shrinks it. Watch the
filter learn a velocity it was never told, and how the gating distance
separates plausible continuations from absurd ones.
"""

import numpy as np

from stridetrack import BoundingBox, Detection, MotionModel, gating_distance, initiate, predict, update
from stridetrack.kalman import state_box

model = MotionModel()

# An object drifts right at 3 px/frame; the filter starts with zero velocity.
state = initiate(Detection(frame=1, box=BoundingBox(100, 100, 40, 60)), model)
print("frame  est_cx  est_vx  pos_std")
for frame in range(2, 9):
    state = predict(state, model, dt=1)
    truth_left = 100 + 3 * (frame - 1)
    measured = Detection(frame=frame, box=BoundingBox(truth_left, 100, 40, 60))
    state = update(state, measured, model)
    pos_std = float(np.sqrt(state.covariance[0, 0]))
    print(f"{frame:>5}  {state.mean[0]:6.1f}  {state.mean[4]:6.2f}  {pos_std:7.2f}")

# Gating: squared Mahalanobis distance of a candidate detection under the
# predictive distribution. 9.488 is the 95% chi-square bound for 4 dof.
state = predict(state, model, dt=1)
predicted = state_box(state)
near = Detection(frame=9, box=BoundingBox(predicted.left + 2, predicted.top, 40, 60))
far = Detection(frame=9, box=BoundingBox(predicted.left + 80, predicted.top, 40, 60))
print(f"\ngating distance, 2 px off the prediction:  {gating_distance(state, near, model):8.2f}")
print(f"gating distance, 80 px off the prediction: {gating_distance(state, far, model):8.2f}")
print("admissible under the 9.488 gate:", gating_distance(state, near, model) < 9.488)
