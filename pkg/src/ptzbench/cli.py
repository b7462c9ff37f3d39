"""Command-line runner: execute tracker-by-sequence grids, rank, generate data.

Subcommands:

  run    execute every (tracker x sequence) combination under one
         configuration; write results.csv, aggregate.csv, scatter.csv and
         manifest.json into the output directory
  table  read a results directory and print the ranked aggregate table
  gen    materialize a synthetic sequence in the on-disk dataset layout

Exit codes: 0 success, 1 usage error, 2 data error, 3 some runs failed.
All randomness flows from --seed; with declared timing two identical
invocations produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .dataset import (
    Sequence,
    SyntheticSpec,
    generate_synthetic_sequence,
    load_sequence,
    write_sequence,
)
from .errors import PtzBenchError
from .geometry import SphericalPoint
from .metrics import (
    RESULT_HEADER,
    SCATTER_HEADER,
    dataset_summary,
    parse_result_row,
    rank,
    result_row,
    scatter_points,
    scatter_row,
)
from .simulator import SimConfig, run_simulation
from .trackers import TRACKER_NAMES, create_tracker

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_PARTIAL = 3

_MAX_WORKERS = 4


def synthetic_presets(seed: int) -> dict[str, SyntheticSpec]:
    """Named synthetic scenarios; all derive their texture from the seed."""
    return {
        "static": SyntheticSpec(
            name="static",
            duration=3.0,
            fps=10.0,
            seed=seed,
        ),
        "constant-velocity": SyntheticSpec(
            name="constant-velocity",
            duration=4.0,
            fps=10.0,
            seed=seed,
            start=SphericalPoint(-24.0, 0.0),
            velocity=(12.0, 0.0),
        ),
        "accelerating": SyntheticSpec(
            name="accelerating",
            duration=4.0,
            fps=10.0,
            seed=seed,
            start=SphericalPoint(-60.0, 0.0),
            velocity=(5.0, 0.0),
            acceleration=(8.0, 0.0),
        ),
    }


@dataclass
class RunSpec:
    """Everything cmd_run needs; serialized verbatim into the manifest."""

    trackers: list[str]
    config: SimConfig
    out_dir: Path
    seed: int
    timing: str
    dataset: Path | None = None
    synthetic: str | None = None

    def to_manifest(self) -> dict:
        return {
            "version": __version__,
            "trackers": self.trackers,
            "config": self.config.to_dict(),
            "seed": self.seed,
            "timing": self.timing,
            "dataset": str(self.dataset) if self.dataset is not None else None,
            "synthetic": self.synthetic,
        }

    @staticmethod
    def from_manifest(data: dict, out_dir: Path) -> "RunSpec":
        return RunSpec(
            trackers=list(data["trackers"]),
            config=SimConfig.from_dict(data["config"]),
            out_dir=out_dir,
            seed=int(data["seed"]),
            timing=str(data["timing"]),
            dataset=Path(data["dataset"]) if data.get("dataset") else None,
            synthetic=data.get("synthetic"),
        )


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_timing(text: str) -> float | None:
    """measured -> None; declared:<seconds> -> that constant."""
    if text == "measured":
        return None
    if text.startswith("declared:"):
        try:
            cost = float(text.split(":", 1)[1])
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad declared cost in {text!r}")
        if cost < 0:
            raise argparse.ArgumentTypeError("declared cost must be >= 0")
        return cost
    raise argparse.ArgumentTypeError(f"timing must be 'measured' or 'declared:<seconds>', got {text!r}")


_PREDICTION_FLAGS = {"none": None, "model1": 1, "model2": 2, "model3": 3}


def _discover_sequences(spec: RunSpec) -> list[Sequence]:
    if spec.synthetic is not None:
        presets = synthetic_presets(spec.seed)
        if spec.synthetic not in presets:
            raise PtzBenchError(
                f"unknown synthetic preset {spec.synthetic!r}; choose from {', '.join(sorted(presets))}"
            )
        return [generate_synthetic_sequence(presets[spec.synthetic])]
    root = spec.dataset
    if root is None:
        raise PtzBenchError("either a dataset root or a synthetic preset is required")
    if (root / "meta.json").is_file():
        return [load_sequence(root)]
    children = sorted(p for p in root.iterdir() if (p / "meta.json").is_file()) if root.is_dir() else []
    if not children:
        raise PtzBenchError(f"{root}: no sequence (meta.json) found in it or its children")
    return [load_sequence(child) for child in children]


def _execute_one(name: str, seq: Sequence, spec: RunSpec):
    declared = _parse_timing(spec.timing)
    tracker = create_tracker(name, sequence=seq, declared_cost=declared)
    return run_simulation(seq, tracker, spec.config).result()


def cmd_run(spec: RunSpec) -> int:
    try:
        sequences = _discover_sequences(spec)
    except PtzBenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    spec.out_dir.mkdir(parents=True, exist_ok=True)

    jobs = [(tracker, seq) for tracker in spec.trackers for seq in sequences]
    outcomes: dict[tuple[str, str], object] = {}
    failures: list[str] = []
    with concurrent.futures.ThreadPoolExecutor(max_workers=min(_MAX_WORKERS, len(jobs))) as pool:
        futures = {
            pool.submit(_execute_one, tracker, seq, spec): (tracker, seq.name)
            for tracker, seq in jobs
        }
        for future in concurrent.futures.as_completed(futures):
            key = futures[future]
            try:
                outcomes[key] = future.result()
            except Exception as exc:
                failures.append(f"{key[0]} on {key[1]}: {exc}")
                print(f"run failed: {key[0]} on {key[1]}: {exc}", file=sys.stderr)

    if not outcomes:
        print("error: all runs failed", file=sys.stderr)
        return EXIT_DATA

    rows = [RESULT_HEADER]
    for (tracker, seq_name) in sorted(outcomes):
        rows.append(result_row(tracker, seq_name, outcomes[(tracker, seq_name)]))
    _atomic_write(spec.out_dir / "results.csv", "\n".join(rows) + "\n")

    summaries = []
    for tracker in spec.trackers:
        per_tracker = [res for (name, _), res in sorted(outcomes.items()) if name == tracker]
        if per_tracker:
            summaries.append((tracker, dataset_summary(per_tracker)))
    ranked = rank(summaries)
    agg_rows = [RESULT_HEADER]
    for tracker, summary in ranked:
        agg_rows.append(result_row(tracker, "ALL", summary))
    _atomic_write(spec.out_dir / "aggregate.csv", "\n".join(agg_rows) + "\n")

    scatter_rows = [SCATTER_HEADER]
    for name, bor_value, tf_value in scatter_points(ranked):
        scatter_rows.append(scatter_row(name, bor_value, tf_value))
    _atomic_write(spec.out_dir / "scatter.csv", "\n".join(scatter_rows) + "\n")

    _atomic_write(
        spec.out_dir / "manifest.json",
        json.dumps(spec.to_manifest(), indent=2, sort_keys=True) + "\n",
    )

    if failures:
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_table(results_dir: Path) -> int:
    path = results_dir / "results.csv"
    if not path.is_file():
        print(f"error: {path} not found", file=sys.stderr)
        return EXIT_DATA
    lines = path.read_text().splitlines()
    if not lines or lines[0] != RESULT_HEADER:
        print(f"error: {path} has an unexpected header", file=sys.stderr)
        return EXIT_DATA
    per_tracker: dict[str, list] = {}
    try:
        for line in lines[1:]:
            if not line.strip():
                continue
            tracker, _, result = parse_result_row(line)
            per_tracker.setdefault(tracker, []).append(result)
    except ValueError as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
        return EXIT_DATA
    if not per_tracker:
        print(f"error: {path} contains no result rows", file=sys.stderr)
        return EXIT_DATA

    ranked = rank([(name, dataset_summary(results)) for name, results in per_tracker.items()])
    print(f"{'Tracker':<12} {'Score':>6} {'BOR':>6} {'TF':>6} {'PR':>6}")
    for name, summary in ranked:
        bor_text = f"{summary.bor:.2f}" if summary.bor is not None else "  -1"
        print(f"{name:<12} {summary.score:>6.2f} {bor_text:>6} {summary.tf:>6.2f} {summary.pr:>6.2f}")
    return EXIT_OK


def cmd_gen(preset: str, out_dir: Path, seed: int) -> int:
    presets = synthetic_presets(seed)
    if preset not in presets:
        print(
            f"error: unknown synthetic preset {preset!r}; choose from {', '.join(sorted(presets))}",
            file=sys.stderr,
        )
        return EXIT_USAGE
    try:
        seq = generate_synthetic_sequence(presets[preset])
        write_sequence(seq, out_dir)
    except (PtzBenchError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    print(f"wrote {len(seq)} frames to {out_dir}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ptzbench",
        description="Simulated pan-tilt-zoom tracking benchmark over spherical video.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute tracker x sequence runs")
    src = p_run.add_mutually_exclusive_group()
    src.add_argument("--dataset", type=Path, help="sequence directory, or a directory of them")
    src.add_argument("--synthetic", help="synthetic preset name (static, constant-velocity, accelerating)")
    src.add_argument("--from-manifest", type=Path, help="re-execute a previous run from its manifest.json")
    p_run.add_argument("--tracker", default="ncc", help=f"comma-separated names from: {', '.join(TRACKER_NAMES)}")
    p_run.add_argument("--out", type=Path, default=Path("results"), help="output directory")
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--execution-ratio", type=float, default=1.0)
    p_run.add_argument("--camera-speed", type=float, default=60.0)
    p_run.add_argument("--communication-delay", type=float, default=0.0)
    p_run.add_argument("--fps", type=float, default=None, help="override the sequence frame rate")
    p_run.add_argument("--prediction", choices=sorted(_PREDICTION_FLAGS), default="none")
    p_run.add_argument("--prediction-scale", type=float, default=1.0)
    p_run.add_argument("--hfov", type=float, default=60.0)
    p_run.add_argument("--width", type=int, default=800)
    p_run.add_argument("--height", type=int, default=600)
    p_run.add_argument("--timing", default="measured", help="'measured' or 'declared:<seconds>'")

    p_table = sub.add_parser("table", help="print the ranked aggregate table for a results directory")
    p_table.add_argument("results_dir", type=Path)

    p_gen = sub.add_parser("gen", help="write a synthetic sequence to disk")
    p_gen.add_argument("--synthetic", required=True, help="preset name")
    p_gen.add_argument("--out", type=Path, required=True)
    p_gen.add_argument("--seed", type=int, default=0)
    return parser


def _spec_from_args(args: argparse.Namespace) -> RunSpec:
    if args.from_manifest is not None:
        data = json.loads(args.from_manifest.read_text())
        return RunSpec.from_manifest(data, out_dir=args.out)
    trackers = [name.strip() for name in args.tracker.split(",") if name.strip()]
    if not trackers:
        raise argparse.ArgumentTypeError("at least one tracker is required")
    for name in trackers:
        if name not in TRACKER_NAMES:
            raise argparse.ArgumentTypeError(f"unknown tracker {name!r}")
    _parse_timing(args.timing)
    config = SimConfig(
        execution_ratio=args.execution_ratio,
        camera_speed=args.camera_speed,
        communication_delay=args.communication_delay,
        fps=args.fps,
        prediction_model=_PREDICTION_FLAGS[args.prediction],
        prediction_scale=args.prediction_scale,
        hfov=args.hfov,
        width=args.width,
        height=args.height,
    )
    return RunSpec(
        trackers=trackers,
        config=config,
        out_dir=args.out,
        seed=args.seed,
        timing=args.timing,
        dataset=args.dataset,
        synthetic=args.synthetic,
    )


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(_spec_from_args(args))
        if args.command == "table":
            return cmd_table(args.results_dir)
        return cmd_gen(args.synthetic, args.out, args.seed)
    except (argparse.ArgumentTypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PtzBenchError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
