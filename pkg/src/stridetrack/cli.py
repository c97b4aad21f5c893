"""Command-line entry point: one binary, four subcommands.

    stridetrack track --config run.toml --out tracks.txt [--frames N] [--section.key value ...]
    stridetrack synth --spec scenario.toml --out-dir data/
    stridetrack eval  --gt gt.txt --pred tracks.txt [--iou 0.5] [--csv] [--jobs N]
    stridetrack bench --config run.toml [--repeats 5] [--jobs N] [--section.key value ...]

Exit codes are stable contracts: 0 success, 1 usage/config/parse errors,
2 runtime errors. ``synth -> track -> eval`` composes into a reproducible
pipeline from one config; all stdout is deterministic given the inputs.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from .config import ConfigError, build_schedule, load_run_config, scenario_spec_from_toml
from .metrics import EvalReport, evaluate, measure_throughput
from .mot_io import MotFormatError, generate_scenario, parse_mot_csv, write_mot_csv, write_scenario
from .tracker import run_sequence

__all__ = ["main"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="stridetrack", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    track = sub.add_parser("track", help="run the tracker over configured detector files")
    track.add_argument("--config", required=True, help="run configuration (TOML)")
    track.add_argument("--out", required=True, help="output MOT CSV path")
    track.add_argument("--frames", type=int, default=None, help="track frames 1..N")

    synth = sub.add_parser("synth", help="generate a synthetic scenario")
    synth.add_argument("--spec", required=True, help="scenario description (TOML)")
    synth.add_argument("--out-dir", required=True, help="output directory")

    ev = sub.add_parser("eval", help="CLEAR-MOT evaluation of predictions against ground truth")
    ev.add_argument("--gt", required=True, help="ground-truth MOT CSV")
    ev.add_argument("--pred", required=True, help="prediction MOT CSV")
    ev.add_argument("--iou", type=float, default=0.5, help="match threshold (default 0.5)")
    ev.add_argument("--csv", action="store_true", help="emit a CSV summary row instead of key=value")
    ev.add_argument("--jobs", type=int, default=1, help="parallel sequences (reserved; single input)")

    bench = sub.add_parser("bench", help="measure tracking-core throughput")
    bench.add_argument("--config", required=True, help="run configuration (TOML)")
    bench.add_argument("--repeats", type=int, default=5, help="timed repeats (median reported)")
    bench.add_argument("--jobs", type=int, default=1, help="parallel sequences (reserved; single input)")

    return parser


def _collect_overrides(extra: Sequence[str]) -> list[tuple[str, str]]:
    """Turn leftover ``--section.key value`` (or ``--section.key=value``)
    arguments into override pairs."""
    overrides = []
    i = 0
    while i < len(extra):
        flag = extra[i]
        if not flag.startswith("--") or "." not in flag:
            raise UsageError(f"unrecognized argument: {flag}")
        if "=" in flag:
            key, value = flag[2:].split("=", 1)
            overrides.append((key, value))
            i += 1
            continue
        if i + 1 >= len(extra):
            raise UsageError(f"override flag {flag} needs a value")
        overrides.append((flag[2:], extra[i + 1]))
        i += 2
    return overrides


def _frame_range(explicit: int | None, configured: int | None, schedule) -> range:
    if explicit is not None:
        n = explicit
    elif configured is not None:
        n = configured
    else:
        n = schedule.max_frame()
    if n < 0:
        raise UsageError(f"frame count must be >= 0, got {n}")
    return range(1, n + 1)


def _cmd_track(ns: argparse.Namespace, overrides: list[tuple[str, str]]) -> int:
    config_path = Path(ns.config)
    cfg = load_run_config(config_path, overrides)
    schedule = build_schedule(cfg, config_path.parent)
    frames = _frame_range(ns.frames, cfg.num_frames, schedule)
    output = run_sequence(schedule, frames, cfg.tracker, model=cfg.model)
    write_mot_csv(output, ns.out)
    return EXIT_OK


def _cmd_synth(ns: argparse.Namespace) -> int:
    spec = scenario_spec_from_toml(ns.spec)
    data = generate_scenario(spec)
    write_scenario(data, ns.out_dir)
    return EXIT_OK


def _cmd_eval(ns: argparse.Namespace) -> int:
    if ns.jobs < 1:
        raise UsageError(f"--jobs must be >= 1, got {ns.jobs}")
    if not 0.0 < ns.iou <= 1.0:
        raise UsageError(f"--iou must be in (0, 1], got {ns.iou}")
    gt = parse_mot_csv(ns.gt)
    pred = parse_mot_csv(ns.pred)
    report = evaluate(gt, pred, iou_threshold=ns.iou)
    if ns.csv:
        sys.stdout.write(EvalReport.csv_header() + "\n" + report.to_csv_row() + "\n")
    else:
        sys.stdout.write(report.to_kv_text())
    return EXIT_OK


def _cmd_bench(ns: argparse.Namespace, overrides: list[tuple[str, str]]) -> int:
    if ns.jobs < 1:
        raise UsageError(f"--jobs must be >= 1, got {ns.jobs}")
    config_path = Path(ns.config)
    cfg = load_run_config(config_path, overrides)
    schedule = build_schedule(cfg, config_path.parent)
    frames = _frame_range(None, cfg.num_frames, schedule)
    report = measure_throughput(
        schedule, frames, cfg.tracker, model=cfg.model, repeats=ns.repeats
    )
    sys.stdout.write(report.to_kv_text())
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        ns, extra = parser.parse_known_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)

    try:
        if ns.command in ("track", "bench"):
            overrides = _collect_overrides(extra)
        elif extra:
            raise UsageError(f"unrecognized arguments: {' '.join(extra)}")

        if ns.command == "track":
            return _cmd_track(ns, overrides)
        if ns.command == "synth":
            return _cmd_synth(ns)
        if ns.command == "eval":
            return _cmd_eval(ns)
        if ns.command == "bench":
            return _cmd_bench(ns, overrides)
        raise UsageError(f"unknown command: {ns.command}")
    except (UsageError, ConfigError, MotFormatError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - runtime failures map to exit 2
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
