"""Online multi-object tracking with a staggered detector ensemble.

Fuses detections from detectors that each fire every f frames, maintains
constant-velocity Kalman tracks through gated minimum-cost assignment, and
ships MOT-format I/O, a synthetic-scenario oracle, CLEAR-MOT evaluation, and
a throughput benchmark.
"""

from .association import (
    DEFAULT_GATE_CHI2,
    DEFAULT_MIN_IOU,
    AssociationResult,
    CostMatrix,
    associate,
    solve_assignment,
)
from .core import (
    BoundingBox,
    Detection,
    DetectionSet,
    Track,
    TrackStatus,
    iou,
    iou_matrix,
    nms,
)
from .ensemble import (
    DEFAULT_NMS_IOU,
    DetectorSource,
    EnsembleSchedule,
    FrameBundle,
    active_sources,
    fuse_frame,
)
from .kalman import (
    DegenerateInnovationError,
    KalmanTrackState,
    MotionModel,
    gating_distance,
    initiate,
    log_likelihood,
    predict,
    update,
)
from .metrics import BenchReport, EvalReport, evaluate, measure_throughput
from .mot_io import (
    DetectorModel,
    MotFormatError,
    MotRow,
    ObjectMotion,
    ScenarioData,
    ScenarioSpec,
    detection_set_from_rows,
    generate_scenario,
    lanes_scenario,
    parse_mot_csv,
    schedule_from_scenario,
    write_mot_csv,
    write_scenario,
)
from .tracker import Tracker, TrackerConfig, TrackerOutput, run_sequence

__version__ = "0.1.0"

__all__ = [
    "AssociationResult",
    "BenchReport",
    "BoundingBox",
    "CostMatrix",
    "DEFAULT_GATE_CHI2",
    "DEFAULT_MIN_IOU",
    "DEFAULT_NMS_IOU",
    "DegenerateInnovationError",
    "Detection",
    "DetectionSet",
    "DetectorModel",
    "DetectorSource",
    "EnsembleSchedule",
    "EvalReport",
    "FrameBundle",
    "KalmanTrackState",
    "MotFormatError",
    "MotRow",
    "MotionModel",
    "ObjectMotion",
    "ScenarioData",
    "ScenarioSpec",
    "Track",
    "TrackStatus",
    "Tracker",
    "TrackerConfig",
    "TrackerOutput",
    "active_sources",
    "associate",
    "detection_set_from_rows",
    "evaluate",
    "fuse_frame",
    "gating_distance",
    "generate_scenario",
    "initiate",
    "iou",
    "iou_matrix",
    "lanes_scenario",
    "log_likelihood",
    "measure_throughput",
    "nms",
    "parse_mot_csv",
    "predict",
    "run_sequence",
    "schedule_from_scenario",
    "solve_assignment",
    "update",
    "write_mot_csv",
    "write_scenario",
]
