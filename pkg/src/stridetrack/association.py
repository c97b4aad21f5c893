"""Gated track-to-detection assignment.

Costs are negative log likelihoods of detections under each track's
predictive Gaussian; pairs whose Mahalanobis distance exceeds the gate are
inadmissible. The solver maximizes the number of admissible matches, breaks
cost ties by the lexicographically smallest (track, detection) pair list,
and never matches an inadmissible pair.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import kalman
from .core import Detection, Track, iou_matrix
from .kalman import MotionModel

__all__ = [
    "CostMatrix",
    "AssociationResult",
    "solve_assignment",
    "associate",
    "build_cost_matrix",
    "DEFAULT_GATE_CHI2",
    "DEFAULT_MIN_IOU",
]

# 95% quantile of chi-square with 4 degrees of freedom (the measurement
# dimension); verified against the chi-square CDF in the test suite.
DEFAULT_GATE_CHI2 = 9.488
DEFAULT_MIN_IOU = 0.1


@dataclass(frozen=True)
class CostMatrix:
    """Track x detection costs; +inf marks gated-out (inadmissible) pairs."""

    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim != 2:
            raise ValueError(f"cost matrix must be 2-d, got shape {values.shape}")
        if np.isnan(values).any():
            raise ValueError("cost matrix contains NaN")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def num_tracks(self) -> int:
        return self.values.shape[0]

    @property
    def num_detections(self) -> int:
        return self.values.shape[1]

    def normalized(self) -> np.ndarray:
        """Finite entries shifted so the smallest is 0; +inf preserved."""
        finite = np.isfinite(self.values)
        if not finite.any():
            return self.values.copy()
        return np.where(finite, self.values - self.values[finite].min(), np.inf)


@dataclass(frozen=True)
class AssociationResult:
    """Partition of track and detection indices into matched and unmatched."""

    matches: tuple[tuple[int, int], ...]
    unmatched_tracks: tuple[int, ...]
    unmatched_detections: tuple[int, ...]


def _empty_result(num_tracks: int, num_detections: int) -> AssociationResult:
    return AssociationResult(
        matches=(),
        unmatched_tracks=tuple(range(num_tracks)),
        unmatched_detections=tuple(range(num_detections)),
    )


def _padded_solve(
    costs: np.ndarray, rows: Sequence[int], cols: Sequence[int]
) -> tuple[int, float, list[tuple[int, int]]]:
    """Max-cardinality, min-cost matching on a subproblem of ``costs``.

    Builds the standard padded square matrix: real pairs, one skip dummy per
    row/column priced above any achievable real total, and a free dummy-dummy
    block; +inf entries are replaced by a finite sentinel that provably never
    enters an optimal matching, so the solver sees no overflow.
    Returns (cardinality, total cost, pairs) with costs summed in row order.
    """
    rows = list(rows)
    cols = list(cols)
    r, c = len(rows), len(cols)
    if r == 0 or c == 0:
        return 0, 0.0, []
    sub = costs[np.ix_(rows, cols)]
    finite = np.isfinite(sub)
    if not finite.any():
        return 0, 0.0, []
    skip = sub[finite].sum() + 1.0  # > any real-pair total: cardinality dominates
    forbid = 4.0 * skip  # > 2*skip: never beats skipping both endpoints
    padded = np.full((r + c, r + c), forbid)
    padded[:r, :c] = np.where(finite, sub, forbid)
    padded[np.arange(r), c + np.arange(r)] = skip
    padded[r + np.arange(c), np.arange(c)] = skip
    padded[r:, c:] = 0.0
    ridx, cidx = linear_sum_assignment(padded)
    pairs = [
        (rows[i], cols[j])
        for i, j in zip(ridx, cidx)
        if i < r and j < c and finite[i, j]
    ]
    total = float(sum(costs[t, d] for t, d in pairs))
    return len(pairs), total, pairs


def _lexicographic_refine(
    costs: np.ndarray, card: int, total: float, pairs: list[tuple[int, int]]
) -> list[tuple[int, int]]:
    """Refine an optimal matching to the lexicographically smallest one.

    Walks tracks in ascending order; for each, probes smaller detection
    indices than the current choice and adopts one iff an equally optimal
    completion exists (checked by re-solving the remaining subproblem). When
    the optimum is unique - the usual case with continuous costs and gating -
    no probe subproblem is ever solved.
    """
    num_tracks, num_dets = costs.shape
    current = dict(pairs)  # optimal completion over not-yet-fixed tracks
    remaining_dets = set(range(num_dets))
    fixed: list[tuple[int, int]] = []
    fixed_cost = 0.0
    for t in range(num_tracks):
        d_current = current.pop(t, None)
        limit = num_dets if d_current is None else d_current
        chosen = d_current
        future = range(t + 1, num_tracks)
        for d in sorted(remaining_dets):
            if d >= limit:
                break
            if not np.isfinite(costs[t, d]):
                continue
            sub_card, sub_cost, sub_pairs = _padded_solve(
                costs, future, sorted(remaining_dets - {d})
            )
            if (
                len(fixed) + 1 + sub_card == card
                and fixed_cost + costs[t, d] + sub_cost == total
            ):
                chosen = d
                current = dict(sub_pairs)
                break
        if chosen is None:
            continue
        fixed.append((t, chosen))
        fixed_cost += float(costs[t, chosen])
        remaining_dets.discard(chosen)
    return fixed


def solve_assignment(costs: CostMatrix | np.ndarray) -> AssociationResult:
    """Minimum-cost matching over the finite entries of ``costs``.

    Matches as many admissible pairs as possible, then minimizes total cost;
    among equal-cost optima the lexicographically smallest match list by
    (track index, detection index) is returned. +inf pairs are never matched.
    """
    matrix = costs if isinstance(costs, CostMatrix) else CostMatrix(np.asarray(costs))
    T, D = matrix.values.shape
    if T == 0 or D == 0 or not np.isfinite(matrix.values).any():
        return _empty_result(T, D)
    normalized = matrix.normalized()
    card, total, pairs = _padded_solve(normalized, range(T), range(D))
    pairs = _lexicographic_refine(normalized, card, total, pairs)
    matched_t = {t for t, _ in pairs}
    matched_d = {d for _, d in pairs}
    return AssociationResult(
        matches=tuple(pairs),
        unmatched_tracks=tuple(t for t in range(T) if t not in matched_t),
        unmatched_detections=tuple(d for d in range(D) if d not in matched_d),
    )


def build_cost_matrix(
    tracks: Sequence[Track],
    dets: Sequence[Detection],
    gate_threshold: float,
    model: MotionModel,
) -> CostMatrix:
    """Negative log-likelihood costs with chi-square gating applied.

    Entry (k, i) is -log p(detection i | track k's predictive Gaussian);
    pairs whose squared Mahalanobis distance exceeds ``gate_threshold`` are
    set to +inf ("unlikely movement").
    """
    means = np.stack([t.state.mean for t in tracks])
    covs = np.stack([t.state.covariance for t in tracks])
    zs = np.array(
        [(d.box.center_x, d.box.center_y, d.box.width, d.box.height) for d in dets]
    )
    dist2, loglik = kalman.innovation_stats(means, covs, zs, model)
    values = np.where(dist2 > gate_threshold, np.inf, -loglik)
    return CostMatrix(values)


def associate(
    tracks: Sequence[Track],
    dets: Sequence[Detection],
    gate_threshold: float,
    model: MotionModel,
    min_iou: float = DEFAULT_MIN_IOU,
) -> AssociationResult:
    """Gated optimal assignment of detections to predicted tracks.

    Track states must already be predicted to the detections' frame. After
    solving, any match whose predicted-box/detection IoU falls below
    ``min_iou`` is demoted to unmatched on both sides: a huge covariance can
    make a spatially absurd pair statistically plausible.
    """
    if not tracks or not dets:
        return _empty_result(len(tracks), len(dets))
    result = solve_assignment(build_cost_matrix(tracks, dets, gate_threshold, model))
    if not result.matches:
        return result

    track_ltwh = np.array([_mean_ltwh(tracks[t]) for t, _ in result.matches])
    det_ltwh = np.array(
        [
            (dets[d].box.left, dets[d].box.top, dets[d].box.width, dets[d].box.height)
            for _, d in result.matches
        ]
    )
    overlaps = np.diagonal(iou_matrix(track_ltwh, det_ltwh))
    keep: list[tuple[int, int]] = []
    demoted_t: list[int] = []
    demoted_d: list[int] = []
    for (t, d), overlap in zip(result.matches, overlaps):
        if overlap < min_iou:
            demoted_t.append(t)
            demoted_d.append(d)
        else:
            keep.append((t, d))
    if not demoted_t:
        return result
    return AssociationResult(
        matches=tuple(keep),
        unmatched_tracks=tuple(sorted((*result.unmatched_tracks, *demoted_t))),
        unmatched_detections=tuple(sorted((*result.unmatched_detections, *demoted_d))),
    )


def _mean_ltwh(track: Track) -> np.ndarray:
    cx, cy, w, h = track.state.mean[:4]
    return np.array([cx - w / 2.0, cy - h / 2.0, w, h])
