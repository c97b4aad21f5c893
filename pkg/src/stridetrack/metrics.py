"""CLEAR-MOT evaluation and throughput measurement.

``evaluate`` follows the MOT Challenge protocol: correspondences persist
from frame to frame while their IoU stays at or above the threshold, the
remainder are matched per frame by minimum-cost assignment on (1 - IoU),
and FP/FN/IDSW/Frag are counted from what is left. ``measure_throughput``
times the tracking core alone - detections are pre-loaded, file I/O and
scenario generation are excluded - on a single thread.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from time import perf_counter
from typing import Iterable, Sequence

import numpy as np

from .association import solve_assignment
from .core import iou_matrix
from .ensemble import EnsembleSchedule
from .kalman import MotionModel
from .mot_io import MotRow
from .tracker import Tracker, TrackerConfig, run_sequence

__all__ = ["EvalReport", "evaluate", "BenchReport", "measure_throughput"]


@dataclass(frozen=True)
class EvalReport:
    """CLEAR-MOT counters and derived scores for one sequence."""

    gt_total: int
    fp: int
    fn: int
    idsw: int
    frag: int
    mota: float
    motp: float
    mt: int
    ml: int
    num_objects: int
    hz: float | None = None

    def __post_init__(self) -> None:
        if self.mt + self.ml > self.num_objects:
            raise ValueError("MT + ML exceeds the number of objects")

    _FIELDS = (
        ("GT", "gt_total"),
        ("FP", "fp"),
        ("FN", "fn"),
        ("IDSW", "idsw"),
        ("Frag", "frag"),
        ("MOTA", "mota"),
        ("MOTP", "motp"),
        ("MT", "mt"),
        ("ML", "ml"),
        ("num_objects", "num_objects"),
    )

    def to_kv_text(self) -> str:
        lines = [f"{key}={_fmt(getattr(self, attr))}" for key, attr in self._FIELDS]
        if self.hz is not None:
            lines.append(f"Hz={_fmt(self.hz)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def csv_header(cls) -> str:
        return ",".join(key for key, _ in cls._FIELDS) + ",Hz"

    def to_csv_row(self) -> str:
        vals = [_fmt(getattr(self, attr)) for _, attr in self._FIELDS]
        vals.append(_fmt(self.hz) if self.hz is not None else "")
        return ",".join(vals)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _rows_by_frame(rows: Iterable[MotRow], label: str, require_positive_ids: bool) -> dict:
    by_frame: dict[int, list[MotRow]] = {}
    seen: set[tuple[int, int]] = set()
    for row in rows:
        if require_positive_ids and row.id < 1:
            raise ValueError(f"{label} id must be >= 1, got {row.id} at frame {row.frame}")
        key = (row.frame, row.id)
        if key in seen:
            raise ValueError(f"duplicate identity row: frame {row.frame} id {row.id}")
        seen.add(key)
        by_frame.setdefault(row.frame, []).append(row)
    return by_frame


def evaluate(
    gt: Sequence[MotRow], pred: Sequence[MotRow], iou_threshold: float = 0.5
) -> EvalReport:
    """CLEAR-MOT scores of hypothesis rows against ground-truth rows.

    Per frame: (a) keep every previous gt-pred correspondence whose IoU is
    still at or above the threshold, (b) match the remainder by minimum-cost
    assignment on (1 - IoU) over admissible pairs, (c) count unmatched preds
    as FP, unmatched gts as FN, and a gt matched to a different pred id than
    its last match as an ID switch. Frag counts matched -> unmatched ->
    matched toggles of each object regardless of ids; MT/ML classify objects
    tracked for >= 80% / <= 20% of their ground-truth lifespan.
    """
    if not 0.0 < iou_threshold <= 1.0:
        raise ValueError(f"iou_threshold must be in (0, 1], got {iou_threshold}")
    gt_frames = _rows_by_frame(gt, "ground-truth", require_positive_ids=True)
    pred_frames = _rows_by_frame(pred, "prediction", require_positive_ids=False)

    last_pred: dict[int, int] = {}  # gt id -> last matched pred id
    frag_state: dict[int, str] = {}  # gt id -> never | matched | gap
    gt_lifespan: dict[int, int] = {}
    gt_matched_frames: dict[int, int] = {}

    gt_total = 0
    fp = fn = idsw = frag = 0
    iou_sum = 0.0
    num_matches = 0

    for frame in sorted(set(gt_frames) | set(pred_frames)):
        g_rows = gt_frames.get(frame, [])
        p_rows = pred_frames.get(frame, [])
        gt_total += len(g_rows)
        for row in g_rows:
            gt_lifespan[row.id] = gt_lifespan.get(row.id, 0) + 1

        overlaps = (
            iou_matrix(
                np.array([(r.bb_left, r.bb_top, r.bb_width, r.bb_height) for r in g_rows]),
                np.array([(r.bb_left, r.bb_top, r.bb_width, r.bb_height) for r in p_rows]),
            )
            if g_rows and p_rows
            else np.zeros((len(g_rows), len(p_rows)))
        )

        pred_index = {row.id: j for j, row in enumerate(p_rows)}
        free_g = list(range(len(g_rows)))
        free_p = list(range(len(p_rows)))
        matches: list[tuple[int, int]] = []

        # (a) persist previous correspondences that are still valid
        for gi in sorted(free_g, key=lambda i: g_rows[i].id):
            gid = g_rows[gi].id
            pj = pred_index.get(last_pred.get(gid, -(10**9)))
            if pj is not None and pj in free_p and overlaps[gi, pj] >= iou_threshold:
                matches.append((gi, pj))
                free_g.remove(gi)
                free_p.remove(pj)

        # (b) optimal assignment on what remains
        if free_g and free_p:
            costs = np.full((len(free_g), len(free_p)), np.inf)
            for a, gi in enumerate(free_g):
                for b, pj in enumerate(free_p):
                    if overlaps[gi, pj] >= iou_threshold:
                        costs[a, b] = 1.0 - overlaps[gi, pj]
            result = solve_assignment(costs)
            for a, b in result.matches:
                matches.append((free_g[a], free_p[b]))

        # (c) count
        matched_g = set()
        for gi, pj in matches:
            gid = g_rows[gi].id
            pid = p_rows[pj].id
            matched_g.add(gi)
            if gid in last_pred and last_pred[gid] != pid:
                idsw += 1
            last_pred[gid] = pid
            iou_sum += float(overlaps[gi, pj])
            num_matches += 1
            gt_matched_frames[gid] = gt_matched_frames.get(gid, 0) + 1
            if frag_state.get(gid) == "gap":
                frag += 1
            frag_state[gid] = "matched"
        fp += len(p_rows) - len(matches)
        fn += len(g_rows) - len(matches)
        for gi in range(len(g_rows)):
            if gi in matched_g:
                continue
            gid = g_rows[gi].id
            if frag_state.get(gid) == "matched":
                frag_state[gid] = "gap"

    num_objects = len(gt_lifespan)
    mt = ml = 0
    for gid, lifespan in gt_lifespan.items():
        ratio = gt_matched_frames.get(gid, 0) / lifespan
        if ratio >= 0.8:
            mt += 1
        elif ratio <= 0.2:
            ml += 1

    if gt_total > 0:
        mota = 1.0 - (fn + fp + idsw) / gt_total
    else:
        mota = 1.0 if fp + idsw == 0 else float("-inf")
    motp = iou_sum / num_matches if num_matches else 0.0
    return EvalReport(
        gt_total=gt_total,
        fp=fp,
        fn=fn,
        idsw=idsw,
        frag=frag,
        mota=mota,
        motp=motp,
        mt=mt,
        ml=ml,
        num_objects=num_objects,
    )


@dataclass(frozen=True)
class BenchReport:
    """Throughput of the tracking core: median Hz plus stage breakdown."""

    median_hz: float
    hz_runs: tuple[float, ...]
    stage_ms_per_frame: dict[str, float]
    num_frames: int
    repeats: int

    def to_kv_text(self) -> str:
        lines = [
            f"Hz={_fmt(self.median_hz)}",
            f"frames={self.num_frames}",
            f"repeats={self.repeats}",
        ]
        for i, hz in enumerate(self.hz_runs):
            lines.append(f"run{i}_hz={_fmt(hz)}")
        for stage in ("fuse", "predict", "associate", "update"):
            lines.append(f"{stage}_ms_per_frame={_fmt(self.stage_ms_per_frame[stage])}")
        return "\n".join(lines) + "\n"


def measure_throughput(
    schedule: EnsembleSchedule,
    frames: range,
    config: TrackerConfig | None = None,
    model: MotionModel | None = None,
    repeats: int = 5,
) -> BenchReport:
    """Median frames/second of ``run_sequence`` over ``repeats`` runs.

    Detections must already be loaded into the schedule; nothing here does
    I/O. Each repeat uses a fresh tracker; per-stage times are averaged over
    all repeats.
    """
    if repeats < 3:
        raise ValueError(f"repeats must be >= 3, got {repeats}")
    cfg = config if config is not None else TrackerConfig()
    hz_runs: list[float] = []
    stage_totals = {"fuse": 0.0, "predict": 0.0, "associate": 0.0, "update": 0.0}
    for _ in range(repeats):
        tracker = Tracker(model=model, config=cfg, max_misses=cfg.resolve_max_misses(schedule))
        start = perf_counter()
        run_sequence(schedule, frames, cfg, tracker=tracker)
        elapsed = max(perf_counter() - start, 1e-9)
        hz_runs.append(len(frames) / elapsed)
        for stage, seconds in tracker.stage_seconds.items():
            stage_totals[stage] += seconds
    per_frame_ms = {
        stage: 1000.0 * total / (repeats * max(len(frames), 1))
        for stage, total in stage_totals.items()
    }
    return BenchReport(
        median_hz=statistics.median(hz_runs),
        hz_runs=tuple(hz_runs),
        stage_ms_per_frame=per_frame_ms,
        num_frames=len(frames),
        repeats=repeats,
    )
