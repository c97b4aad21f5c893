"""MOT Challenge CSV ingestion/emission and the synthetic-scenario oracle.

File rows are ``frame,id,bb_left,bb_top,bb_width,bb_height,conf,x,y,z`` with
1-based frames and ids and id -1 for raw detections. Coordinates are written
as the shortest decimal that round-trips, so parse(write(rows)) is the
identity on the retained fields. World coordinates x, y, z are parsed,
ignored, and echoed as -1.

The generator produces objects on exact linear trajectories (reflecting off
the arena walls) plus per-detector corrupted views: scheduled frames only,
independent dropouts, additive position noise, and Poisson false positives.
Randomness comes from numpy's seeded PCG64 generator with a fixed draw order,
so scenario bytes are identical across platforms and runs.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Union

import numpy as np

from .core import BoundingBox, Detection, DetectionSet
from .ensemble import DetectorSource, EnsembleSchedule
from .tracker import TrackerOutput

__all__ = [
    "MotRow",
    "MotFormatError",
    "parse_mot_csv",
    "write_mot_csv",
    "detection_set_from_rows",
    "DetectorModel",
    "ObjectMotion",
    "ScenarioSpec",
    "ScenarioData",
    "lanes_scenario",
    "generate_scenario",
    "write_scenario",
    "schedule_from_scenario",
]


@dataclass(frozen=True)
class MotRow:
    """One MOT CSV row. ``id`` is -1 for detections, >= 1 for identities."""

    frame: int
    id: int
    bb_left: float
    bb_top: float
    bb_width: float
    bb_height: float
    conf: float = 1.0
    x: float = -1.0
    y: float = -1.0
    z: float = -1.0

    def __post_init__(self) -> None:
        for name in ("frame", "id"):
            value = getattr(self, name)
            if int(value) != value:
                raise ValueError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        for name in ("bb_left", "bb_top", "bb_width", "bb_height", "conf", "x", "y", "z"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"non-finite value for {name}: {value}")
            object.__setattr__(self, name, value)
        if self.frame < 1:
            raise ValueError(f"frame index must be >= 1, got {self.frame}")
        if self.bb_width <= 0.0 or self.bb_height <= 0.0:
            raise ValueError(
                f"non-positive box dimension: {self.bb_width}x{self.bb_height}"
            )

    def box(self) -> BoundingBox:
        return BoundingBox(self.bb_left, self.bb_top, self.bb_width, self.bb_height)


class MotFormatError(ValueError):
    """Malformed MOT CSV input; carries the line number and offending text."""

    def __init__(self, line_number: int, text: str, reason: str) -> None:
        self.line_number = line_number
        self.text = text
        self.reason = reason
        super().__init__(f"line {line_number}: {reason}: {text!r}")


def _iter_lines(source: Union[str, Path, IO[str]]) -> Iterable[str]:
    if hasattr(source, "read"):
        yield from source  # type: ignore[union-attr]
    else:
        with open(source, "r", encoding="utf-8") as fh:
            yield from fh


def parse_mot_csv(source: Union[str, Path, IO[str]]) -> list[MotRow]:
    """Parse MOT CSV from a path or text stream, sorted by (frame, id).

    Rows need at least 6 comma-separated fields; fields 7-10 (conf, x, y, z)
    default to -1. Rows violating the format raise MotFormatError with the
    line number - corrupt data fails loudly instead of being clamped.
    """
    rows: list[MotRow] = []
    for line_number, raw in enumerate(_iter_lines(source), start=1):
        text = raw.strip()
        if not text:
            continue
        fields = [f.strip() for f in text.split(",")]
        if len(fields) < 6:
            raise MotFormatError(line_number, text, "expected at least 6 fields")
        if len(fields) > 10:
            raise MotFormatError(line_number, text, "expected at most 10 fields")
        try:
            frame = int(fields[0])
            ident = int(fields[1])
            numbers = [float(f) for f in fields[2:]]
        except ValueError:
            raise MotFormatError(line_number, text, "non-numeric field") from None
        numbers += [-1.0] * (8 - len(numbers))
        left, top, width, height, conf, x, y, z = numbers
        if frame < 1:
            raise MotFormatError(line_number, text, "non-positive frame index")
        if width <= 0.0 or height <= 0.0:
            raise MotFormatError(line_number, text, "non-positive box dimension")
        if not all(math.isfinite(v) for v in numbers):
            raise MotFormatError(line_number, text, "non-finite value")
        rows.append(MotRow(frame, ident, left, top, width, height, conf, x, y, z))
    rows.sort(key=lambda r: (r.frame, r.id))
    return rows


def _format_number(value: float) -> str:
    # shortest decimal that round-trips; integral values print without ".0"
    if value == int(value):
        return str(int(value))
    return repr(value)


def write_mot_csv(
    rows: Union[TrackerOutput, Iterable[MotRow]],
    destination: Union[str, Path, IO[str], None] = None,
) -> str:
    """Serialize rows to MOT CSV text, sorted by (frame, id).

    TrackerOutput rows are written with conf 1; MotRow inputs keep their own
    conf. World coordinates are always echoed as -1. Returns the text and
    additionally writes it to ``destination`` when given.
    """
    if isinstance(rows, TrackerOutput):
        mot_rows = [
            MotRow(frame, tid, box.left, box.top, box.width, box.height, 1.0)
            for frame, tid, box in rows.rows
        ]
    else:
        mot_rows = list(rows)
    mot_rows.sort(key=lambda r: (r.frame, r.id))
    lines = [
        ",".join(
            (
                str(r.frame),
                str(r.id),
                _format_number(r.bb_left),
                _format_number(r.bb_top),
                _format_number(r.bb_width),
                _format_number(r.bb_height),
                _format_number(r.conf),
                "-1",
                "-1",
                "-1",
            )
        )
        for r in mot_rows
    ]
    text = "\n".join(lines) + ("\n" if lines else "")
    if destination is not None:
        if hasattr(destination, "write"):
            destination.write(text)  # type: ignore[union-attr]
        else:
            Path(destination).write_text(text, encoding="utf-8")
    return text


def detection_set_from_rows(
    rows: Iterable[MotRow], source_id: int = 0, clamp_confidence: bool = True
) -> DetectionSet:
    """Turn parsed detection rows into a DetectionSet for one source.

    Confidences outside [0, 1] are clamped into range (exact -1 stays
    "unscored") when ``clamp_confidence`` - real detector files carry
    unbounded scores.
    """
    dets = []
    for r in rows:
        conf = r.conf
        if clamp_confidence and conf != -1.0:
            conf = min(max(conf, 0.0), 1.0)
        dets.append(Detection(frame=r.frame, box=r.box(), confidence=conf, source_id=source_id))
    return DetectionSet(dets)


# ---------------------------------------------------------------------------
# Synthetic scenarios
# ---------------------------------------------------------------------------

_NAME_RE = re.compile(r"^[A-Za-z0-9_-]+$")


@dataclass(frozen=True)
class DetectorModel:
    """Schedule and corruption model of one synthetic detector."""

    name: str
    stride: int = 1
    phase: int = 0
    miss_rate: float = 0.0
    fp_rate: float = 0.0
    noise_sigma: float = 0.0

    def __post_init__(self) -> None:
        if not _NAME_RE.match(self.name):
            raise ValueError(f"detector name must be filesystem-safe, got {self.name!r}")
        if self.stride < 1:
            raise ValueError(f"stride must be >= 1, got {self.stride}")
        if not 0 <= self.phase < self.stride:
            raise ValueError(f"phase must be in [0, stride), got {self.phase}")
        if not 0.0 <= self.miss_rate <= 1.0:
            raise ValueError(f"miss_rate must be in [0, 1], got {self.miss_rate}")
        if self.fp_rate < 0.0:
            raise ValueError(f"fp_rate must be >= 0, got {self.fp_rate}")
        if self.noise_sigma < 0.0:
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")

    def fires_at(self, frame: int) -> bool:
        offset = frame - 1 - self.phase
        return offset >= 0 and offset % self.stride == 0


@dataclass(frozen=True)
class ObjectMotion:
    """Linear trajectory: initial box center, velocity, and box size."""

    x0: float
    y0: float
    vx: float
    vy: float
    box_w: float
    box_h: float

    def __post_init__(self) -> None:
        if self.box_w <= 0.0 or self.box_h <= 0.0:
            raise ValueError("object box size must be positive")


@dataclass(frozen=True)
class ScenarioSpec:
    """Deterministic scenario: exact trajectories plus corrupted detectors."""

    num_frames: int
    arena_w: float
    arena_h: float
    objects: tuple[ObjectMotion, ...]
    detectors: tuple[DetectorModel, ...]
    rng_seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "objects", tuple(self.objects))
        object.__setattr__(self, "detectors", tuple(self.detectors))
        if self.num_frames < 1:
            raise ValueError(f"num_frames must be >= 1, got {self.num_frames}")
        if self.arena_w <= 0.0 or self.arena_h <= 0.0:
            raise ValueError("arena dimensions must be positive")
        names = [d.name for d in self.detectors]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate detector names: {names}")
        for obj in self.objects:
            # strict fit keeps the reflection bounds well-ordered (lo < hi)
            if obj.box_w >= self.arena_w or obj.box_h >= self.arena_h:
                raise ValueError("object box does not fit in the arena")
            lo_x, hi_x = obj.box_w / 2.0, self.arena_w - obj.box_w / 2.0
            lo_y, hi_y = obj.box_h / 2.0, self.arena_h - obj.box_h / 2.0
            if not (lo_x <= obj.x0 <= hi_x and lo_y <= obj.y0 <= hi_y):
                raise ValueError("object starts outside the arena")

    @property
    def num_objects(self) -> int:
        return len(self.objects)


@dataclass
class ScenarioData:
    """Generator output: ground truth, per-detector rows, and drop counters."""

    spec: ScenarioSpec
    ground_truth: list[MotRow]
    detector_rows: dict[str, list[MotRow]]
    miss_counts: dict[str, tuple[int, int]] = field(default_factory=dict)  # (dropped, seen)


def lanes_scenario(
    num_objects: int,
    num_frames: int,
    arena_w: float,
    arena_h: float,
    speed: float,
    box_w: float,
    box_h: float,
    detectors: Iterable[DetectorModel],
    rng_seed: int = 0,
) -> ScenarioSpec:
    """Well-separated layout: one horizontal lane per object.

    Objects live in distinct lanes (constant y) and move horizontally at
    ``speed``, alternating direction by index; travel windows are centered so
    objects stay clear of the walls when the arena allows it. Lanes never
    interact, which makes the scenario its own association oracle.
    """
    if num_objects < 1:
        raise ValueError("num_objects must be >= 1")
    lane_height = arena_h / num_objects
    if lane_height < box_h:
        raise ValueError(
            f"lanes too tight: {num_objects} objects of height {box_h} in arena height {arena_h}"
        )
    lo_x, hi_x = box_w / 2.0, arena_w - box_w / 2.0
    objects = []
    for i in range(num_objects):
        vx = speed if i % 2 == 0 else -speed
        # center the travel window; deterministic per-object stagger
        x0 = (arena_w - vx * (num_frames - 1)) / 2.0 + ((i * 37) % 101) - 50.0
        x0 = min(max(x0, lo_x), hi_x)
        y0 = (i + 0.5) * lane_height
        objects.append(ObjectMotion(x0=x0, y0=y0, vx=vx, vy=0.0, box_w=box_w, box_h=box_h))
    return ScenarioSpec(
        num_frames=num_frames,
        arena_w=arena_w,
        arena_h=arena_h,
        objects=tuple(objects),
        detectors=tuple(detectors),
        rng_seed=rng_seed,
    )


def _advance(pos: float, vel: float, lo: float, hi: float) -> tuple[float, float]:
    """One Euler step with reflection at [lo, hi]; velocity stays well-defined."""
    pos += vel
    while pos < lo or pos > hi:
        if pos < lo:
            pos = 2.0 * lo - pos
        else:
            pos = 2.0 * hi - pos
        vel = -vel
    return pos, vel


def _trajectories(spec: ScenarioSpec) -> np.ndarray:
    """Exact object centers: array (num_objects, num_frames, 2)."""
    out = np.empty((spec.num_objects, spec.num_frames, 2))
    for i, obj in enumerate(spec.objects):
        lo_x, hi_x = obj.box_w / 2.0, spec.arena_w - obj.box_w / 2.0
        lo_y, hi_y = obj.box_h / 2.0, spec.arena_h - obj.box_h / 2.0
        x, y, vx, vy = obj.x0, obj.y0, obj.vx, obj.vy
        out[i, 0] = (x, y)
        for f in range(1, spec.num_frames):
            x, vx = _advance(x, vx, lo_x, hi_x)
            y, vy = _advance(y, vy, lo_y, hi_y)
            out[i, f] = (x, y)
    return out


def generate_scenario(spec: ScenarioSpec) -> ScenarioData:
    """Ground truth plus per-detector corrupted detection rows.

    Draw order (fixed for reproducibility): per detector in listed order,
    per scheduled frame ascending, per object ascending - one uniform for
    the dropout, then two normals for the position noise when noise_sigma
    is nonzero; then the frame's Poisson false-positive count, and per false
    positive two uniforms for the center and one for the confidence.
    """
    centers = _trajectories(spec)
    ground_truth: list[MotRow] = []
    for f in range(1, spec.num_frames + 1):
        for i, obj in enumerate(spec.objects):
            cx, cy = centers[i, f - 1]
            ground_truth.append(
                MotRow(
                    frame=f,
                    id=i + 1,
                    bb_left=cx - obj.box_w / 2.0,
                    bb_top=cy - obj.box_h / 2.0,
                    bb_width=obj.box_w,
                    bb_height=obj.box_h,
                    conf=1.0,
                )
            )

    if spec.objects:
        fp_w = float(np.median([o.box_w for o in spec.objects]))
        fp_h = float(np.median([o.box_h for o in spec.objects]))
    else:
        fp_w = fp_h = min(spec.arena_w, spec.arena_h) / 10.0

    rng = np.random.default_rng(spec.rng_seed)
    detector_rows: dict[str, list[MotRow]] = {}
    miss_counts: dict[str, tuple[int, int]] = {}
    for det in spec.detectors:
        rows: list[MotRow] = []
        dropped = 0
        seen = 0
        for f in range(1, spec.num_frames + 1):
            if not det.fires_at(f):
                continue
            for i, obj in enumerate(spec.objects):
                seen += 1
                if rng.random() < det.miss_rate:
                    dropped += 1
                    continue
                cx, cy = centers[i, f - 1]
                left = cx - obj.box_w / 2.0
                top = cy - obj.box_h / 2.0
                if det.noise_sigma > 0.0:
                    noise = rng.normal(0.0, det.noise_sigma, size=2)
                    left += float(noise[0])
                    top += float(noise[1])
                rows.append(
                    MotRow(f, -1, left, top, obj.box_w, obj.box_h, conf=1.0)
                )
            if det.fp_rate > 0.0:
                for _ in range(int(rng.poisson(det.fp_rate))):
                    cx = float(rng.uniform(fp_w / 2.0, spec.arena_w - fp_w / 2.0))
                    cy = float(rng.uniform(fp_h / 2.0, spec.arena_h - fp_h / 2.0))
                    conf = float(rng.uniform(0.0, 1.0))
                    rows.append(
                        MotRow(f, -1, cx - fp_w / 2.0, cy - fp_h / 2.0, fp_w, fp_h, conf=conf)
                    )
        detector_rows[det.name] = rows
        miss_counts[det.name] = (dropped, seen)
    return ScenarioData(
        spec=spec,
        ground_truth=ground_truth,
        detector_rows=detector_rows,
        miss_counts=miss_counts,
    )


def write_scenario(data: ScenarioData, out_dir: Union[str, Path]) -> list[Path]:
    """Write ``gt/gt.txt`` and one ``det_<name>.txt`` per detector."""
    out = Path(out_dir)
    gt_dir = out / "gt"
    gt_dir.mkdir(parents=True, exist_ok=True)
    written = [gt_dir / "gt.txt"]
    write_mot_csv(data.ground_truth, written[0])
    for name, rows in data.detector_rows.items():
        path = out / f"det_{name}.txt"
        write_mot_csv(rows, path)
        written.append(path)
    return written


def schedule_from_scenario(data: ScenarioData) -> EnsembleSchedule:
    """In-memory ensemble over the generated detector streams."""
    sources = []
    for idx, det in enumerate(data.spec.detectors):
        sources.append(
            DetectorSource(
                source_id=idx,
                name=det.name,
                stride_f=det.stride,
                phase=det.phase,
                detections=detection_set_from_rows(
                    data.detector_rows[det.name], source_id=idx, clamp_confidence=False
                ),
            )
        )
    return EnsembleSchedule(sources=tuple(sources))
