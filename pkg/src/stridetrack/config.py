"""Run configuration: TOML documents plus dotted command-line overrides.

Precedence is flag > file > default. Unknown sections, keys, or override
names are rejected. The matching thresholds live under two names each
(gate_chi2 / min_iou under ``assoc``, nms_iou under ``ensemble``, and all
three again under ``tracker``); both spellings are accepted and the
``tracker`` one wins when both are set.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - version-dependent import
    import tomli as tomllib

from .association import DEFAULT_GATE_CHI2, DEFAULT_MIN_IOU
from .ensemble import DEFAULT_NMS_IOU, DetectorSource, EnsembleSchedule
from .kalman import MotionModel
from .mot_io import (
    DetectorModel,
    ObjectMotion,
    ScenarioSpec,
    detection_set_from_rows,
    lanes_scenario,
    parse_mot_csv,
)
from .tracker import TrackerConfig

__all__ = [
    "ConfigError",
    "SourceConfig",
    "RunConfig",
    "load_run_config",
    "build_schedule",
    "scenario_spec_from_toml",
]


class ConfigError(ValueError):
    """Bad configuration document or override."""


# section -> key -> (type, default); None default means "derived later"
_SCHEMA: dict[str, dict[str, tuple[type, Any]]] = {
    "kalman": {
        "pos_sigma_scale": (float, 1.0 / 20.0),
        "vel_sigma_scale": (float, 1.0 / 160.0),
        "meas_sigma_scale": (float, 1.0 / 20.0),
    },
    "ensemble": {
        "nms_iou": (float, DEFAULT_NMS_IOU),
    },
    "assoc": {
        "gate_chi2": (float, DEFAULT_GATE_CHI2),
        "min_iou": (float, DEFAULT_MIN_IOU),
    },
    "tracker": {
        "confirm_hits": (int, 3),
        "max_misses": (int, None),
        "gate_chi2": (float, None),
        "min_iou": (float, None),
        "nms_iou": (float, None),
        "min_confidence": (float, 0.3),
    },
    "run": {
        "num_frames": (int, None),
    },
}

_SOURCE_KEYS = {"path": str, "stride": int, "phase": int, "name": str}


@dataclass(frozen=True)
class SourceConfig:
    path: str
    stride: int = 1
    phase: int | None = None
    name: str | None = None


@dataclass(frozen=True)
class RunConfig:
    model: MotionModel
    tracker: TrackerConfig
    sources: tuple[SourceConfig, ...]
    num_frames: int | None = None


def _coerce(section: str, key: str, value: Any, target: type) -> Any:
    if target is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if target is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{section}.{key} must be an integer, got {value!r}")
        return value
    if target is str and isinstance(value, str):
        return value
    if isinstance(value, target) and not isinstance(value, bool):
        return value
    raise ConfigError(f"{section}.{key} must be {target.__name__}, got {value!r}")


def _parse_override(key: str, raw: str) -> tuple[str, str, Any]:
    if "." not in key:
        raise ConfigError(f"override key must look like section.key, got {key!r}")
    section, name = key.split(".", 1)
    if section not in _SCHEMA or name not in _SCHEMA[section]:
        raise ConfigError(f"unknown config key: {key}")
    target = _SCHEMA[section][name][0]
    try:
        if target is int:
            return section, name, int(raw)
        if target is float:
            return section, name, float(raw)
    except ValueError:
        raise ConfigError(f"cannot parse {raw!r} as {target.__name__} for {key}") from None
    return section, name, raw


def load_run_config(
    path: str | Path, overrides: Sequence[tuple[str, str]] = ()
) -> RunConfig:
    """Load a TOML run configuration and apply ``(key, value)`` overrides."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from None

    values: dict[str, dict[str, Any]] = {s: {} for s in _SCHEMA}
    sources_raw = data.pop("sources", [])
    for section, content in data.items():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section: {section}")
        if not isinstance(content, dict):
            raise ConfigError(f"section {section} must be a table")
        for key, value in content.items():
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown config key: {section}.{key}")
            values[section][key] = _coerce(section, key, value, _SCHEMA[section][key][0])

    for key, raw in overrides:
        section, name, value = _parse_override(key, raw)
        values[section][name] = value

    def get(section: str, key: str) -> Any:
        if key in values[section]:
            return values[section][key]
        return _SCHEMA[section][key][1]

    if not isinstance(sources_raw, list):
        raise ConfigError("sources must be an array of tables")
    sources: list[SourceConfig] = []
    for i, entry in enumerate(sources_raw):
        if not isinstance(entry, dict):
            raise ConfigError(f"sources[{i}] must be a table")
        unknown = set(entry) - set(_SOURCE_KEYS)
        if unknown:
            raise ConfigError(f"unknown source key(s) in sources[{i}]: {sorted(unknown)}")
        if "path" not in entry:
            raise ConfigError(f"sources[{i}] is missing required key: path")
        kwargs: dict[str, Any] = {}
        for key, value in entry.items():
            kwargs[key] = _coerce(f"sources[{i}]", key, value, _SOURCE_KEYS[key])
        sources.append(SourceConfig(**kwargs))

    model = MotionModel(
        pos_sigma_scale=get("kalman", "pos_sigma_scale"),
        vel_sigma_scale=get("kalman", "vel_sigma_scale"),
        meas_sigma_scale=get("kalman", "meas_sigma_scale"),
    )

    def pick(tracker_key: str, other_section: str, other_key: str) -> Any:
        tracker_value = values["tracker"].get(tracker_key)
        if tracker_value is not None:
            return tracker_value
        return get(other_section, other_key)

    try:
        tracker = TrackerConfig(
            confirm_hits=get("tracker", "confirm_hits"),
            max_misses=get("tracker", "max_misses"),
            gate_chi2=pick("gate_chi2", "assoc", "gate_chi2"),
            min_iou=pick("min_iou", "assoc", "min_iou"),
            nms_iou=pick("nms_iou", "ensemble", "nms_iou"),
            min_confidence=get("tracker", "min_confidence"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return RunConfig(
        model=model,
        tracker=tracker,
        sources=tuple(sources),
        num_frames=get("run", "num_frames"),
    )


def build_schedule(config: RunConfig, base_dir: str | Path = ".") -> EnsembleSchedule:
    """Parse every configured detection file into an EnsembleSchedule.

    Relative source paths resolve against ``base_dir`` (normally the config
    file's directory). Missing phases stagger the sources uniformly:
    source i gets phase i mod stride.
    """
    if not config.sources:
        raise ConfigError("config names no detector sources")
    base = Path(base_dir)
    sources = []
    for i, src in enumerate(config.sources):
        path = Path(src.path)
        if not path.is_absolute():
            path = base / path
        if not path.exists():
            raise ConfigError(f"source file not found: {path}")
        rows = parse_mot_csv(path)
        phase = src.phase if src.phase is not None else i % src.stride
        name = src.name if src.name is not None else path.stem
        sources.append(
            DetectorSource(
                source_id=i,
                name=name,
                stride_f=src.stride,
                phase=phase,
                detections=detection_set_from_rows(rows, source_id=i),
            )
        )
    try:
        return EnsembleSchedule(sources=tuple(sources))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


_SCENARIO_KEYS = {
    "num_frames": int,
    "arena_w": float,
    "arena_h": float,
    "seed": int,
    "num_objects": int,
    "speed": float,
    "box_w": float,
    "box_h": float,
}
_SCENARIO_DETECTOR_KEYS = {
    "name": str,
    "stride": int,
    "phase": int,
    "miss_rate": float,
    "fp_rate": float,
    "noise_sigma": float,
}
_SCENARIO_OBJECT_KEYS = {
    "x0": float,
    "y0": float,
    "vx": float,
    "vy": float,
    "box_w": float,
    "box_h": float,
}


def scenario_spec_from_toml(path: str | Path) -> ScenarioSpec:
    """Read a scenario document: a [scenario] table, [[detectors]], and
    either explicit [[objects]] or lane-layout keys (num_objects, speed,
    box_w, box_h)."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"scenario file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from None

    unknown = set(data) - {"scenario", "detectors", "objects"}
    if unknown:
        raise ConfigError(f"unknown scenario section(s): {sorted(unknown)}")
    scenario = data.get("scenario", {})
    unknown = set(scenario) - set(_SCENARIO_KEYS)
    if unknown:
        raise ConfigError(f"unknown scenario key(s): {sorted(unknown)}")
    for key in ("num_frames", "arena_w", "arena_h"):
        if key not in scenario:
            raise ConfigError(f"scenario is missing required key: {key}")

    def sval(key: str, default: Any = None) -> Any:
        if key not in scenario:
            return default
        return _coerce("scenario", key, scenario[key], _SCENARIO_KEYS[key])

    detectors = []
    for i, entry in enumerate(data.get("detectors", [])):
        unknown = set(entry) - set(_SCENARIO_DETECTOR_KEYS)
        if unknown:
            raise ConfigError(f"unknown detector key(s) in detectors[{i}]: {sorted(unknown)}")
        kwargs = {
            k: _coerce(f"detectors[{i}]", k, v, _SCENARIO_DETECTOR_KEYS[k])
            for k, v in entry.items()
        }
        try:
            detectors.append(DetectorModel(**kwargs))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"detectors[{i}]: {exc}") from None
    if not detectors:
        raise ConfigError("scenario names no detectors")

    try:
        if "objects" in data:
            objects = []
            for i, entry in enumerate(data["objects"]):
                unknown = set(entry) - set(_SCENARIO_OBJECT_KEYS)
                if unknown:
                    raise ConfigError(
                        f"unknown object key(s) in objects[{i}]: {sorted(unknown)}"
                    )
                kwargs = {
                    k: _coerce(f"objects[{i}]", k, v, _SCENARIO_OBJECT_KEYS[k])
                    for k, v in entry.items()
                }
                objects.append(ObjectMotion(**kwargs))
            return ScenarioSpec(
                num_frames=sval("num_frames"),
                arena_w=sval("arena_w"),
                arena_h=sval("arena_h"),
                objects=tuple(objects),
                detectors=tuple(detectors),
                rng_seed=sval("seed", 0),
            )
        for key in ("num_objects", "speed", "box_w", "box_h"):
            if key not in scenario:
                raise ConfigError(
                    f"scenario without [[objects]] needs lane keys; missing: {key}"
                )
        return lanes_scenario(
            num_objects=sval("num_objects"),
            num_frames=sval("num_frames"),
            arena_w=sval("arena_w"),
            arena_h=sval("arena_h"),
            speed=sval("speed"),
            box_w=sval("box_w"),
            box_h=sval("box_h"),
            detectors=detectors,
            rng_seed=sval("seed", 0),
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid scenario: {exc}") from None
