"""Greedy nearest-frontier baseline: always head for the closest boundary cell."""
from __future__ import annotations

import math
import time

import numpy as np

from .. import planning
from ..explorer import EpisodeLog, ExplorerConfig, Simulation, TickRecord
from ..world import Cell, GroundTruthMap, OccupancyGrid, RobotState, advance


def baseline_nearest_frontier(grid: OccupancyGrid, robot: RobotState, dist: np.ndarray | None = None,
                              exclude=()) -> Cell | None:
    """Boundary cell with the smallest path distance from the robot; None when none is reachable."""
    if dist is None:
        dist = planning.distance_field(grid, robot.cell)
    mask = planning.boundary_mask(grid) & np.isfinite(dist)
    for x, y in exclude:
        mask[y, x] = False
    if not mask.any():
        return None
    ys, xs = np.nonzero(mask)
    d = dist[ys, xs]
    best = d.min()
    return min((int(x), int(y)) for x, y, v in zip(xs, ys, d) if v <= best + 1e-9)


def run_baseline(truth: GroundTruthMap, config: ExplorerConfig | None = None, observer=None) -> EpisodeLog:
    config = config or ExplorerConfig()
    sim = Simulation(truth, config, skeleton=False)
    log = EpisodeLog("nearest-frontier", truth.name, config.seed, sim.start)
    dead: set[Cell] = set()
    t_start = time.perf_counter()
    for tick in range(config.max_ticks):
        n_changed = sim.perceive()
        rec = TickRecord(tick, 0.0, 0.0, 0.0, 0.0, 0.0, "", "")
        t0 = time.perf_counter()
        path = None
        while True:
            target = baseline_nearest_frontier(sim.grid, sim.robot, exclude=dead)
            if target is None or target != sim.robot.cell:
                break
            # standing on a boundary cell that sensing cannot clear
            dead.add(target)
        if target is not None:
            path = planning.a_star(sim.grid, sim.robot.cell, target).path
        rec.decision_time = time.perf_counter() - t0
        rec.target, rec.target_kind = target, "boundary"
        rec.fsm_state = "PLANNING_MOVING" if target is not None else "TERMINATED"
        rec.trace = "nf"
        if path:
            sim.robot = advance(sim.robot, path, sim.grid)
        rec.changed = n_changed
        rec.coverage = sim.coverage()
        rec.path_length = sim.robot.path_length()
        log.ticks.append(rec)
        if observer is not None:
            observer(sim, None, rec)
        if target is None:
            log.terminated = True
            break
    log.wall_time = time.perf_counter() - t_start
    log.final = (sim, None)
    return log
