"""Run one episode for a named planner, optionally writing snapshots."""
from __future__ import annotations

import os
from pathlib import Path

from .. import stg
from ..explorer import EpisodeLog, run_episode
from ..world import GroundTruthMap
from .baseline import run_baseline
from .config import EpisodeConfig
from .render import render_snapshot


def snapshots_enabled() -> bool:
    return os.environ.get("EXPLORE_NO_SNAPSHOTS", "") not in ("1", "true", "yes")


def run_planner(truth: GroundTruthMap, cfg: EpisodeConfig, snapshot_dir: Path | None = None) -> EpisodeLog:
    """Run ``cfg.planner`` on ``truth``; SVG snapshots every ``cfg.snapshot_every`` ticks into ``snapshot_dir``."""
    observer = None
    if snapshot_dir is not None and snapshots_enabled():
        snapshot_dir.mkdir(parents=True, exist_ok=True)

        def observer(sim, ex, rec):
            if rec.tick % cfg.snapshot_every == 0:
                svg = render_snapshot(sim.grid, sim.field if sim.use_skeleton else None, sim.graph, sim.robot,
                                      ex.planned_path if ex is not None else None, rec.target)
                (snapshot_dir / f"{rec.tick:04d}.svg").write_text(svg, encoding="utf-8")

    runner = run_episode if cfg.planner == "stg" else run_baseline
    return runner(truth, cfg.explorer(), observer=observer)


def graph_dump(log: EpisodeLog) -> str:
    sim, _ = log.final
    return stg.dump(sim.graph) if sim.graph is not None else ""
