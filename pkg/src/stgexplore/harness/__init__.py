"""Benchmark harness: episode runner, baseline planner, metrics, snapshots and CLI."""
from .baseline import baseline_nearest_frontier, run_baseline
from .config import EpisodeConfig, load_config
from .report import compare_report, write_metrics
from .render import render_snapshot
from .runner import run_planner

__all__ = [
    "EpisodeConfig",
    "baseline_nearest_frontier",
    "compare_report",
    "load_config",
    "render_snapshot",
    "run_baseline",
    "run_planner",
    "write_metrics",
]
