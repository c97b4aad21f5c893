"""Constant-velocity linear-Gaussian motion and measurement model.

The track state is the 8-vector (cx, cy, w, h, vcx, vcy, vw, vh): box center,
box size, and their per-frame velocities. Measurements are (cx, cy, w, h).
Noise standard deviations scale with the current box height so near and far
objects behave comparably.

The arithmetic lives in three batched, dimension-agnostic primitives
(``lg_predict``, ``lg_update``, ``lg_innovation``) that work for any state /
measurement dimension; the box-level operations are thin wrappers supplying
the constant-velocity matrices. Everything is pure: states are immutable and
identical inputs produce bit-identical outputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import BoundingBox, Detection

__all__ = [
    "DegenerateInnovationError",
    "KalmanTrackState",
    "MotionModel",
    "initiate",
    "predict",
    "update",
    "gating_distance",
    "log_likelihood",
    "predict_batch",
    "update_batch",
    "innovation_stats",
    "lg_predict",
    "lg_update",
    "lg_innovation",
    "box_to_measurement",
    "measurement_to_box",
    "state_box",
]

STATE_DIM = 8
MEAS_DIM = 4
_LOG_2PI = float(np.log(2.0 * np.pi))


class DegenerateInnovationError(np.linalg.LinAlgError):
    """The innovation covariance is not positive definite."""


def _cholesky(mats: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(mats)
    except np.linalg.LinAlgError as exc:
        raise DegenerateInnovationError("degenerate innovation covariance") from exc


def _symmetrize(covs: np.ndarray) -> np.ndarray:
    """Force exact symmetry and clear sub-1e-9 negative diagonal dust."""
    sym = 0.5 * (covs + np.swapaxes(covs, -1, -2))
    diag = np.diagonal(sym, axis1=-2, axis2=-1)
    if diag.size and diag.min() < -1e-9:
        raise DegenerateInnovationError("covariance diagonal went negative")
    if diag.size and (diag < 0.0).any():
        sym = sym.copy()
        idx = np.arange(sym.shape[-1])
        sym[..., idx, idx] = np.maximum(diag, 0.0)
    return sym


# ---------------------------------------------------------------------------
# Generic batched linear-Gaussian steps
# ---------------------------------------------------------------------------

def lg_predict(
    means: np.ndarray, covs: np.ndarray, F: np.ndarray, Q: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Time update for a batch: means (B, n), covs (B, n, n), shared F, Q
    either shared (n, n) or per-item (B, n, n)."""
    means2 = means @ F.T
    covs2 = F @ covs @ F.T + Q
    return means2, _symmetrize(covs2)


def lg_update(
    means: np.ndarray,
    covs: np.ndarray,
    zs: np.ndarray,
    H: np.ndarray,
    R: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Measurement update for a batch, one measurement row per state.

    The innovation covariance is certified positive definite by Cholesky
    factorization; a failed factorization raises DegenerateInnovationError
    instead of silently regularizing.
    """
    S = H @ covs @ H.T + R
    _cholesky(S)
    PHt = covs @ H.T
    gain_t = np.linalg.solve(S, np.swapaxes(PHt, -1, -2))  # (B, m, n) = S^-1 H P
    gain = np.swapaxes(gain_t, -1, -2)
    innov = zs - means @ H.T
    means2 = means + (gain @ innov[..., None])[..., 0]
    eye = np.eye(covs.shape[-1])
    covs2 = (eye - gain @ H) @ covs
    return means2, _symmetrize(covs2)


def lg_innovation(
    means: np.ndarray,
    covs: np.ndarray,
    zs: np.ndarray,
    H: np.ndarray,
    R: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Innovation statistics of every measurement against every state.

    means (B, n), covs (B, n, n), zs (N, m), R (B, m, m) or (m, m).
    Returns (distance2, log_likelihood), both (B, N): the squared Mahalanobis
    distance and the log density of z under N(H mean, H cov H^T + R).
    """
    S = H @ covs @ H.T + R
    L = _cholesky(S)
    zpred = means @ H.T  # (B, m)
    y = zs[None, :, :] - zpred[:, None, :]  # (B, N, m)
    w = np.linalg.solve(L, np.swapaxes(y, -1, -2))  # (B, m, N)
    dist2 = np.einsum("bmn,bmn->bn", w, w)
    logdet = 2.0 * np.log(np.diagonal(L, axis1=-2, axis2=-1)).sum(axis=-1)
    m = H.shape[0]
    loglik = -0.5 * (dist2 + logdet[:, None] + m * _LOG_2PI)
    return dist2, loglik


# ---------------------------------------------------------------------------
# Box-tracking model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KalmanTrackState:
    """Per-track Gaussian: mean (8,) and covariance (8, 8), both read-only."""

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self) -> None:
        mean = np.array(self.mean, dtype=np.float64, copy=True)
        cov = np.array(self.covariance, dtype=np.float64, copy=True)
        if mean.shape != (STATE_DIM,):
            raise ValueError(f"mean must have shape ({STATE_DIM},), got {mean.shape}")
        if cov.shape != (STATE_DIM, STATE_DIM):
            raise ValueError(
                f"covariance must have shape ({STATE_DIM}, {STATE_DIM}), got {cov.shape}"
            )
        mean.flags.writeable = False
        cov.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)


@dataclass(frozen=True)
class MotionModel:
    """Constant-velocity transition with height-scaled diagonal noise.

    Per-frame noise sigmas: position/size use pos_sigma_scale * h, velocities
    vel_sigma_scale * h, measurements meas_sigma_scale * h, where h is the
    track's current mean height. Fresh tracks start with 2x the position
    sigma and 10x the velocity sigma (velocities are unknown at birth).
    """

    pos_sigma_scale: float = 1.0 / 20.0
    vel_sigma_scale: float = 1.0 / 160.0
    meas_sigma_scale: float = 1.0 / 20.0

    def __post_init__(self) -> None:
        for name in ("pos_sigma_scale", "vel_sigma_scale", "meas_sigma_scale"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be > 0")

    def transition_matrix(self, dt: int = 1) -> np.ndarray:
        F = np.eye(STATE_DIM)
        F[np.arange(MEAS_DIM), MEAS_DIM + np.arange(MEAS_DIM)] = float(dt)
        return F

    @property
    def observation_matrix(self) -> np.ndarray:
        return np.eye(MEAS_DIM, STATE_DIM)

    def process_noise(self, heights: np.ndarray) -> np.ndarray:
        """Q for each height: (B,) -> (B, 8, 8) diagonal."""
        h = np.asarray(heights, dtype=np.float64).reshape(-1)
        sig = np.empty((h.size, STATE_DIM))
        sig[:, :MEAS_DIM] = (self.pos_sigma_scale * h)[:, None]
        sig[:, MEAS_DIM:] = (self.vel_sigma_scale * h)[:, None]
        Q = np.zeros((h.size, STATE_DIM, STATE_DIM))
        idx = np.arange(STATE_DIM)
        Q[:, idx, idx] = sig**2
        return Q

    def measurement_noise(self, heights: np.ndarray) -> np.ndarray:
        """R for each height: (B,) -> (B, 4, 4) diagonal."""
        h = np.asarray(heights, dtype=np.float64).reshape(-1)
        sig = (self.meas_sigma_scale * h)[:, None] * np.ones(MEAS_DIM)
        R = np.zeros((h.size, MEAS_DIM, MEAS_DIM))
        idx = np.arange(MEAS_DIM)
        R[:, idx, idx] = sig**2
        return R

    def initial_covariance(self, height: float) -> np.ndarray:
        sig = np.empty(STATE_DIM)
        sig[:MEAS_DIM] = 2.0 * self.pos_sigma_scale * height
        sig[MEAS_DIM:] = 10.0 * self.vel_sigma_scale * height
        return np.diag(sig**2)


def box_to_measurement(box: BoundingBox) -> np.ndarray:
    """MOT corner-form box -> measurement vector (cx, cy, w, h)."""
    return np.array([box.center_x, box.center_y, box.width, box.height])


def measurement_to_box(z: np.ndarray) -> BoundingBox:
    cx, cy, w, h = (float(v) for v in z)
    return BoundingBox(left=cx - w / 2.0, top=cy - h / 2.0, width=w, height=h)


def state_box(state: KalmanTrackState) -> BoundingBox:
    return measurement_to_box(state.mean[:MEAS_DIM])


def initiate(det: Detection, model: MotionModel) -> KalmanTrackState:
    """Fresh track state centered on the detection with zero velocity."""
    z = box_to_measurement(det.box)
    mean = np.zeros(STATE_DIM)
    mean[:MEAS_DIM] = z
    return KalmanTrackState(mean, model.initial_covariance(z[3]))


def _check_dt(dt: int) -> int:
    if dt != int(dt) or int(dt) < 1:
        raise ValueError(f"dt must be an integer >= 1, got {dt}")
    return int(dt)


def predict_batch(
    means: np.ndarray, covs: np.ndarray, model: MotionModel, dt: int = 1
) -> tuple[np.ndarray, np.ndarray]:
    """Advance a batch of track states by dt frames: F(dt) mean, and
    F(dt) cov F(dt)^T + dt*Q with Q taken at each track's current height."""
    dt = _check_dt(dt)
    F = model.transition_matrix(dt)
    Q = model.process_noise(means[:, 3])
    return lg_predict(means, covs, F, float(dt) * Q)


def predict(state: KalmanTrackState, model: MotionModel, dt: int = 1) -> KalmanTrackState:
    means, covs = predict_batch(state.mean[None, :], state.covariance[None, :, :], model, dt)
    return KalmanTrackState(means[0], covs[0])


def update_batch(
    means: np.ndarray, covs: np.ndarray, zs: np.ndarray, model: MotionModel
) -> tuple[np.ndarray, np.ndarray]:
    H = model.observation_matrix
    R = model.measurement_noise(means[:, 3])
    return lg_update(means, covs, zs, H, R)


def update(state: KalmanTrackState, det: Detection, model: MotionModel) -> KalmanTrackState:
    z = box_to_measurement(det.box)
    means, covs = update_batch(
        state.mean[None, :], state.covariance[None, :, :], z[None, :], model
    )
    return KalmanTrackState(means[0], covs[0])


def innovation_stats(
    means: np.ndarray, covs: np.ndarray, zs: np.ndarray, model: MotionModel
) -> tuple[np.ndarray, np.ndarray]:
    """Gating distances and log likelihoods of every measurement under every
    track's predictive distribution: (B, 8) x (N, 4) -> two (B, N) arrays."""
    H = model.observation_matrix
    R = model.measurement_noise(means[:, 3])
    return lg_innovation(means, covs, zs, H, R)


def gating_distance(state: KalmanTrackState, det: Detection, model: MotionModel) -> float:
    """Squared Mahalanobis distance of the detection under the predictive
    distribution N(H mean, S); 0 iff the detection sits exactly at H mean."""
    z = box_to_measurement(det.box)
    dist2, _ = innovation_stats(
        state.mean[None, :], state.covariance[None, :, :], z[None, :], model
    )
    return float(dist2[0, 0])


def log_likelihood(state: KalmanTrackState, det: Detection, model: MotionModel) -> float:
    """Log density of the detection under the track's predictive Gaussian."""
    z = box_to_measurement(det.box)
    _, loglik = innovation_stats(
        state.mean[None, :], state.covariance[None, :, :], z[None, :], model
    )
    return float(loglik[0, 0])
