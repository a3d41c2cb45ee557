"""Metrics CSV and multi-planner comparison summary."""
from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from ..explorer import EpisodeLog

METRICS_HEADER = ("tick", "coverage", "path_length_m", "decision_time_s", "fsm_state")


def write_metrics(log: EpisodeLog, path: str | Path, timing: bool = True) -> None:
    """One row per tick.  ``timing=False`` writes zero decision times so the file is reproducible byte for byte."""
    with open(path, "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(METRICS_HEADER)
        for r in log.ticks:
            dt = r.decision_time if timing else 0.0
            w.writerow((r.tick, f"{r.coverage:.6f}", f"{r.path_length:.6f}", f"{dt:.6f}", r.fsm_state))


def read_metrics(path: str | Path) -> list[dict]:
    with open(path, newline="", encoding="ascii") as fh:
        return list(csv.DictReader(fh))


def _stats(values):
    vals = [v for v in values if v is not None]
    if not vals:
        return math.nan, math.nan
    return float(np.mean(vals)), float(np.std(vals))


def summarize(logs: list[EpisodeLog]) -> dict[str, dict]:
    """Per-planner aggregates, planners in order of first appearance."""
    groups: dict[str, list[EpisodeLog]] = {}
    for log in logs:
        groups.setdefault(log.planner, []).append(log)
    out = {}
    for name, group in groups.items():
        t99 = [lg.ticks_to(0.99) for lg in group]
        dec = [r.decision_time for lg in group for r in lg.ticks]
        out[name] = {
            "episodes": len(group),
            "reached": sum(t is not None for t in t99),
            "ticks99": _stats(t99),
            "path": _stats([lg.total_path_length for lg in group]),
            "decision_ms": float(np.mean(dec)) * 1e3 if dec else math.nan,
            "rate": _stats([lg.total_path_length / lg.total_ticks if lg.total_ticks else 0.0 for lg in group]),
            "terminated": sum(lg.terminated for lg in group),
        }
    return out


def _delta(x: float, ref: float) -> str:
    if not (math.isfinite(x) and math.isfinite(ref)) or ref == 0:
        return "n/a"
    return f"{100.0 * (x - ref) / ref:+.1f}%"


def compare_report(logs: list[EpisodeLog]) -> str:
    """Text table: mean/std ticks to 99% coverage, path length, decision time, path per tick; deltas vs the first planner."""
    stats = summarize(logs)
    names = list(stats)
    lines = [
        f"{'planner':<18} {'episodes':>8} {'ticks99 mean':>12} {'std':>8} {'path m mean':>12} {'std':>8} "
        f"{'decision ms':>11} {'m/tick':>7} {'terminated':>10}"
    ]
    for name in names:
        s = stats[name]
        lines.append(
            f"{name:<18} {s['episodes']:>8d} {s['ticks99'][0]:>12.1f} {s['ticks99'][1]:>8.1f} {s['path'][0]:>12.1f} "
            f"{s['path'][1]:>8.1f} {s['decision_ms']:>11.3f} {s['rate'][0]:>7.3f} {s['terminated']:>7d}/{s['episodes']}"
        )
        if s["reached"] < s["episodes"]:
            lines.append(f"  note: {s['episodes'] - s['reached']} episode(s) never reached 99% coverage")
    if len(names) > 1:
        ref = stats[names[0]]
        lines.append("")
        lines.append(f"relative to {names[0]}:")
        for name in names[1:]:
            s = stats[name]
            lines.append(
                f"  {name}: ticks99 {_delta(s['ticks99'][0], ref['ticks99'][0])}, "
                f"path {_delta(s['path'][0], ref['path'][0])}, "
                f"decision time {_delta(s['decision_ms'], ref['decision_ms'])}"
            )
    return "\n".join(lines) + "\n"


def episode_summary(log: EpisodeLog) -> str:
    t99 = log.ticks_to(0.99)
    return (
        f"planner = {log.planner}\nmap = {log.map_name}\nseed = {log.seed}\nstart = {log.start[0]} {log.start[1]}\n"
        f"terminated = {str(log.terminated).lower()}\nticks = {log.total_ticks}\n"
        f"ticks_to_99 = {t99 if t99 is not None else 'none'}\ncoverage = {log.final_coverage:.6f}\n"
        f"path_length_m = {log.total_path_length:.6f}\nwall_time_s = {log.wall_time:.3f}\n"
        f"branch_pushes = {log.pushes}\nbranch_pops = {log.pops}\nreplan_errors = {len(log.errors)}\n"
    )
