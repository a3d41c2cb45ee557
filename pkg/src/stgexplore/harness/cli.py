"""``explore`` command: run planners over seeds on one map and write per-episode outputs.

Exit status: 0 when every episode terminated, 2 when any hit ``--max-ticks``,
1 on bad flags, config or map.
"""
from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path

from ..world import MapFormatError, load_map_file
from .config import PLANNERS, ConfigError, load_config
from .report import compare_report, episode_summary, write_metrics
from .runner import graph_dump, run_planner


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="explore", description="Run skeleton-graph exploration (and baselines) on a grid map.")
    p.add_argument("--map", dest="map_path", help="map file, or the name of a bundled map")
    p.add_argument("--config", help="key = value file; command-line flags override it")
    p.add_argument("--planner", choices=PLANNERS)
    p.add_argument("--compare", choices=PLANNERS, action="append", default=[], help="additional planner to run on the same seeds")
    p.add_argument("--seeds", type=int, default=1, help="number of seeds (0..N-1)")
    p.add_argument("--sensor-range", type=float, help="meters")
    p.add_argument("--resolution", type=float, help="meters per cell")
    p.add_argument("--speed", type=float, help="meters per tick")
    p.add_argument("--max-ticks", type=int)
    p.add_argument("--step", type=int, help="inflow ancestor search depth")
    p.add_argument("--thres", type=int, help="spur pruning wavefront threshold")
    p.add_argument("--near-radius", type=int)
    p.add_argument("--tube-radius", type=int)
    p.add_argument("--fifo", action="store_true", default=None, help="pop stored branches oldest first")
    p.add_argument("--snapshot-every", type=int, help="ticks between SVG snapshots")
    p.add_argument("--deterministic", action="store_true", help="write zero decision times so outputs repeat exactly")
    p.add_argument("--out-dir", default="explore_out")
    return p


def resolve_map(name: str) -> Path:
    path = Path(name)
    if path.exists():
        return path
    stem = path.name[:-4] if path.name.endswith(".txt") else path.name
    bundled = resources.files("stgexplore") / "maps" / f"{stem}.txt"
    if bundled.is_file():
        return Path(str(bundled))
    raise FileNotFoundError(f"map not found: {name}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = load_config(
            args.config, map_path=args.map_path, planner=args.planner, sensor_range=args.sensor_range,
            resolution=args.resolution, speed=args.speed, max_ticks=args.max_ticks, step=args.step,
            thres=args.thres, near_radius=args.near_radius, tube_radius=args.tube_radius,
            snapshot_every=args.snapshot_every, fifo=args.fifo,
        )
        if not cfg.map_path:
            parser.print_usage(sys.stderr)
            print("explore: error: --map is required (flag or config key)", file=sys.stderr)
            return 1
        if args.seeds <= 0:
            raise ConfigError("--seeds must be positive")
        truth = load_map_file(resolve_map(cfg.map_path))
    except (ConfigError, MapFormatError, FileNotFoundError, OSError, ValueError) as err:
        print(f"explore: error: {err}", file=sys.stderr)
        return 1

    planners = [cfg.planner] + [p for p in args.compare if p != cfg.planner]
    out = Path(args.out_dir)
    logs = []
    for planner in planners:
        for seed in range(args.seeds):
            ep_cfg = cfg.with_(planner=planner, seed=seed)
            ep_dir = out / planner / f"seed{seed}" if len(planners) > 1 or args.seeds > 1 else out
            ep_dir.mkdir(parents=True, exist_ok=True)
            log = run_planner(truth, ep_cfg, ep_dir / "snapshots")
            write_metrics(log, ep_dir / "metrics.csv", timing=not args.deterministic)
            (ep_dir / "graph.txt").write_text(graph_dump(log), encoding="ascii")
            (ep_dir / "summary.txt").write_text(episode_summary(log), encoding="ascii")
            logs.append(log)
            state = "terminated" if log.terminated else "incomplete"
            print(f"{planner} seed {seed}: {state} after {log.total_ticks} ticks, "
                  f"coverage {log.final_coverage:.4f}, path {log.total_path_length:.1f} m")
    report = compare_report(logs)
    out.mkdir(parents=True, exist_ok=True)
    (out / "comparison.txt").write_text(report, encoding="ascii")
    if len(planners) > 1 or args.seeds > 1:
        (out / "summary.txt").write_text(report, encoding="ascii")
    print(report, end="")
    return 0 if all(lg.terminated for lg in logs) else 2


if __name__ == "__main__":
    raise SystemExit(main())
