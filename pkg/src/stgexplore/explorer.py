"""Six-state exploration machine driven by the skeletal topological graph."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import ndimage

from . import planning, stg
from .skeleton import SkeletonField, extract
from .stg import BranchId, TopoGraph
from .world import (
    UNKNOWN,
    Cell,
    GroundTruthMap,
    OccupancyGrid,
    PlanningContractError,
    RobotState,
    SensorModel,
    advance,
    coverage,
    sense,
)

MAX_TRANSITIONS = 12


class FsmState(Enum):
    TOPOLOGY_GUIDED = 1
    BRANCH_UPDATE = 2
    BACKTRACKING = 3
    BOUNDARY_GUIDED = 4
    PLANNING_MOVING = 5
    TERMINATED = 6


# allowed arrows of the machine
TRANSITIONS = {
    FsmState.TOPOLOGY_GUIDED: {FsmState.PLANNING_MOVING, FsmState.BRANCH_UPDATE, FsmState.BACKTRACKING, FsmState.BOUNDARY_GUIDED},
    FsmState.BRANCH_UPDATE: {FsmState.PLANNING_MOVING, FsmState.BACKTRACKING},
    FsmState.BACKTRACKING: {FsmState.BRANCH_UPDATE, FsmState.BOUNDARY_GUIDED, FsmState.TERMINATED},
    FsmState.BOUNDARY_GUIDED: {FsmState.PLANNING_MOVING, FsmState.TERMINATED},
    FsmState.PLANNING_MOVING: {FsmState.TOPOLOGY_GUIDED, FsmState.BOUNDARY_GUIDED},
    FsmState.TERMINATED: set(),
}


@dataclass
class ExplorerConfig:
    sensor_range: float = 4.0  # meters
    resolution: float = 0.5  # meters per cell
    speed: float = 1.0  # meters per tick
    max_ticks: int = 5000
    step: int = stg.DEFAULT_STEP
    thres: int = stg.DEFAULT_THRES
    near_radius: int = 5  # cells
    tube_radius: int = 3  # cells
    seed: int = 0
    fifo: bool = False  # pop missedBranches oldest-first instead of LIFO
    n_rays: int = 720

    def __post_init__(self):
        for name in ("sensor_range", "resolution", "speed", "max_ticks", "step", "thres", "near_radius", "tube_radius", "n_rays"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    @property
    def sensor(self) -> SensorModel:
        return SensorModel(range=self.sensor_range, angular_resolution=2 * math.pi / self.n_rays)


@dataclass
class BoundaryPlan:
    cells: list[Cell]
    order: list[int]

    @property
    def tour(self) -> list[Cell]:
        return [self.cells[i] for i in self.order]


@dataclass
class ExplorerState:
    fsm: FsmState = FsmState.TOPOLOGY_GUIDED
    current_branch: BranchId | None = None
    missed_branches: list[list[BranchId]] = field(default_factory=list)
    target: Cell | None = None
    target_node: int | None = None  # set for topology targets
    node_cell: Cell | None = None
    aux: bool = False  # target is a boundary cell visited on behalf of target_node
    target_branch: BranchId | None = None
    planned_path: list[Cell] = field(default_factory=list)
    boundary_plan: BoundaryPlan | None = None
    group: list[BranchId] | None = None  # State 3 -> State 2 restriction
    failing_target: Cell | None = None  # State 5 -> State 4 hand-over
    force_target: bool = False
    dead_nodes: set[int] = field(default_factory=set)
    dead_cells: set[Cell] = field(default_factory=set)
    pushes: int = 0
    pops: int = 0

    def clear_target(self):
        self.target = self.target_node = self.target_branch = self.node_cell = None
        self.planned_path = []
        self.aux = False
        self.force_target = False


@dataclass
class Context:
    """Per-tick view handed to the state functions."""

    grid: OccupancyGrid
    field: SkeletonField
    graph: TopoGraph | None
    robot: RobotState
    config: ExplorerConfig
    reach_from_start: np.ndarray
    _dist: np.ndarray | None = None
    _frontiers: dict[BranchId, list[int]] | None = None

    @property
    def dist(self) -> np.ndarray:
        if self._dist is None:
            self._dist = planning.distance_field(self.grid, self.robot.cell)
        return self._dist

    def d(self, cell: Cell) -> float:
        return float(self.dist[cell[1], cell[0]])


def live_frontiers(ctx: Context, ex: ExplorerState) -> dict[BranchId, list[int]]:
    """Reachable, not abandoned frontier nodes grouped by branch."""
    if ctx._frontiers is None:
        out: dict[BranchId, list[int]] = {}
        g = ctx.graph
        if g is not None:
            for nid in g.frontier:
                if nid in ex.dead_nodes or nid not in g.nodes:
                    continue
                if not math.isfinite(ctx.d(g.nodes[nid].cell)):
                    continue
                out.setdefault(stg.branch_of(g, nid), []).append(nid)
        ctx._frontiers = out
    return ctx._frontiers


def nearest_node(ctx: Context, nodes: list[int]) -> int:
    g = ctx.graph
    return min(nodes, key=lambda n: (ctx.d(g.nodes[n].cell), n))


def boundary_set(ctx: Context, ex: ExplorerState) -> np.ndarray:
    mask = planning.boundary_mask(ctx.grid) & np.isfinite(ctx.dist)
    for x, y in ex.dead_cells:
        mask[y, x] = False
    return mask


def _aim(ex: ExplorerState, ctx: Context, nid: int, branch: BranchId) -> FsmState:
    node = ctx.graph.nodes[nid]
    if ex.target_node != nid:
        ex.clear_target()
        ex.target, ex.target_node, ex.node_cell = node.cell, nid, node.cell
    ex.target_branch = branch
    ex.boundary_plan = None
    return FsmState.PLANNING_MOVING


def step_state1(ctx: Context, ex: ExplorerState) -> FsmState:
    if ctx.graph is None:
        return FsmState.BOUNDARY_GUIDED
    fr = live_frontiers(ctx, ex)
    if not fr:
        return FsmState.BACKTRACKING
    b = ex.current_branch
    if b is not None and b in fr:
        # keep the current target while it is still a frontier of this branch
        if ex.target_node in fr[b]:
            return _aim(ex, ctx, ex.target_node, b)
        return _aim(ex, ctx, nearest_node(ctx, fr[b]), b)
    return FsmState.BRANCH_UPDATE


def _stacked(ex: ExplorerState) -> set[BranchId]:
    return {b for grp in ex.missed_branches for b in grp}


def step_state2(ctx: Context, ex: ExplorerState) -> FsmState:
    fr = live_frontiers(ctx, ex)
    restricted = ex.group is not None
    if restricted:
        cands = [b for b in ex.group if b in fr]
        ex.group = None
    else:
        stacked = _stacked(ex)
        cands = [b for b in fr if b not in stacked]
    if not cands:
        if not restricted and not fr:
            raise PlanningContractError("branch update without any frontier")
        return FsmState.BACKTRACKING
    g = ctx.graph
    score = {b: min(g.nodes[n].wave_front for n in fr[b]) for b in cands}
    winner = min(cands, key=lambda b: (score[b], b))
    losers = sorted(b for b in cands if b != winner)
    if losers:
        ex.missed_branches.append(losers)
        ex.pushes += 1
    ex.current_branch = winner
    return _aim(ex, ctx, nearest_node(ctx, fr[winner]), winner)


def step_state3(ctx: Context, ex: ExplorerState) -> FsmState:
    fr = live_frontiers(ctx, ex)
    while ex.missed_branches:
        grp = ex.missed_branches.pop(0 if ctx.config.fifo else -1)
        ex.pops += 1
        live = [b for b in grp if b in fr]
        if live:
            ex.group = live
            return FsmState.BRANCH_UPDATE
    if ctx.graph is not None and fr:
        # frontiers outside every stored group: start a fresh branch choice
        ex.group = sorted(fr)
        return FsmState.BRANCH_UPDATE
    ex.current_branch = None
    # stack exhausted: only terminate once no boundary remains
    if boundary_set(ctx, ex).any():
        return FsmState.BOUNDARY_GUIDED
    return FsmState.TERMINATED


def failing_region(ctx: Context, cell: Cell) -> np.ndarray:
    """Unknown-wave cells 8-connected to ``cell``: the open space the graph failed to grow into."""
    wave = ctx.field.unknown_wave_mask()
    labels, _ = ndimage.label(wave, structure=np.ones((3, 3), int))
    x, y = cell
    ids = {int(labels[y + dy, x + dx]) for dy in (-1, 0, 1) for dx in (-1, 0, 1)
           if 0 <= x + dx < ctx.grid.width and 0 <= y + dy < ctx.grid.height}
    ids.discard(0)
    return np.isin(labels, list(ids)) if ids else np.zeros_like(wave)


def step_state4(ctx: Context, ex: ExplorerState) -> FsmState:
    mask = boundary_set(ctx, ex)
    failing = ex.failing_target
    ex.failing_target = None
    if failing is not None:
        # boundary work inside the region a topology target could not expand into
        region = ndimage.binary_dilation(failing_region(ctx, failing), structure=np.ones((3, 3), bool))
        r = ctx.config.near_radius
        ys, xs = np.nonzero(mask)
        near = np.zeros_like(mask)
        keep = (xs - failing[0]) ** 2 + (ys - failing[1]) ** 2 <= r * r
        near[ys[keep], xs[keep]] = True
        mask &= region | near
        if not mask.any():
            ex.force_target = True
            ex.target, ex.aux = ex.node_cell, False
            ex.planned_path = []
            return FsmState.PLANNING_MOVING
    elif ex.target is not None and ex.target_node is None and mask[ex.target[1], ex.target[0]]:
        # cached boundary plan still valid
        return FsmState.PLANNING_MOVING
    if not mask.any():
        ex.clear_target()
        return FsmState.TERMINATED
    clusters = planning.boundary_clusters(mask)
    reps = [rep for rep, _ in clusters]
    order = planning.two_opt(reps, ctx.robot.cell)
    ex.boundary_plan = BoundaryPlan(reps, order)
    if failing is None:
        ex.clear_target()
    ex.target = reps[order[0]]
    ex.aux = failing is not None
    ex.planned_path = []
    return FsmState.PLANNING_MOVING


def _retire(ex: ExplorerState) -> None:
    if ex.target_node is not None:
        ex.dead_nodes.add(ex.target_node)
    else:
        ex.dead_cells.add(ex.target)
    ex.clear_target()


def step_state5(ctx: Context, ex: ExplorerState) -> tuple[FsmState, list[Cell] | None]:
    """Returns the next state and, when moving, the path to follow this tick."""
    robot = ctx.robot
    if ex.target_node is not None and not ex.force_target:
        if ex.aux:
            # boundary detour on behalf of the topology target
            if robot.cell == ex.target or not boundary_set(ctx, ex)[ex.target[1], ex.target[0]]:
                if robot.cell == ex.target:
                    ex.dead_cells.add(ex.target)
                ex.target, ex.aux = ex.node_cell, False
                ex.planned_path = []
        if not ex.aux:
            t = ex.node_cell
            close = ctx.d(t) < ctx.config.near_radius
            unknown = ctx.field.state_of(t) == UNKNOWN
            if close and (unknown or robot.cell == t):
                ex.failing_target = t
                return FsmState.BOUNDARY_GUIDED, None
    if robot.cell == ex.target:
        _retire(ex)
        return FsmState.TOPOLOGY_GUIDED, None
    path = ex.planned_path
    if not path or path[-1] != ex.target or robot.cell not in path:
        try:
            res = planning.a_star(ctx.grid, robot.cell, ex.target, ctx.graph, ctx.config.tube_radius)
        except planning.UnreachableError:
            _retire(ex)
            raise
        path = res.path
    path = path[path.index(robot.cell):]
    ex.planned_path = path
    return FsmState.TOPOLOGY_GUIDED, path


@dataclass
class TickRecord:
    tick: int
    coverage: float
    path_length: float
    decision_time: float
    skeleton_time: float
    graph_time: float
    fsm_state: str
    trace: str
    changed: int = 0
    seeds: int = 0
    processed: int = 0
    target: Cell | None = None
    target_kind: str = ""
    target_branch: BranchId | None = None
    current_branch: BranchId | None = None
    branch_live: bool = False
    selected: BranchId | None = None  # set on ticks where State 2 picked a branch
    target_node_branch: BranchId | None = None  # branch of the served node, recomputed from the graph


@dataclass
class EpisodeLog:
    planner: str
    map_name: str
    seed: int
    start: Cell
    ticks: list[TickRecord] = field(default_factory=list)
    terminated: bool = False
    wall_time: float = 0.0
    pushes: int = 0
    pops: int = 0
    errors: list[str] = field(default_factory=list)
    idle_ticks: int = 0

    @property
    def total_ticks(self) -> int:
        return len(self.ticks)

    @property
    def total_path_length(self) -> float:
        return self.ticks[-1].path_length if self.ticks else 0.0

    @property
    def final_coverage(self) -> float:
        return self.ticks[-1].coverage if self.ticks else 0.0

    def ticks_to(self, level: float = 0.99) -> int | None:
        for r in self.ticks:
            if r.coverage >= level:
                return r.tick
        return None


def pick_start(truth: GroundTruthMap, seed: int) -> Cell:
    """Seed 0 uses the map's start cell; other seeds draw a reachable free cell."""
    if seed == 0:
        return truth.start
    cells = np.argwhere(truth.reachable_mask(truth.start))
    y, x = cells[np.random.default_rng(seed).integers(len(cells))]
    return (int(x), int(y))


class Simulation:
    """World state shared by every planner: ground truth, belief grid, skeleton, graph and robot."""

    def __init__(self, truth: GroundTruthMap, config: ExplorerConfig, skeleton: bool = True):
        self.truth = truth
        self.config = config
        self.start = pick_start(truth, config.seed)
        self.grid = OccupancyGrid.like(truth, config.resolution)
        self.field = SkeletonField.virgin(self.grid)
        self.graph: TopoGraph | None = None
        self.robot = RobotState.at_cell(self.start, config.resolution, config.speed)
        self.sensor = config.sensor
        self.use_skeleton = skeleton
        self.reach = truth.reachable_mask(truth.start)
        self.last_skeleton_time = 0.0
        self.last_graph_time = 0.0

    def perceive(self) -> int:
        sense(self.truth, self.grid, self.robot, self.sensor)
        changed = self.grid.consume_changes()
        self.last_skeleton_time = self.last_graph_time = 0.0
        if not self.use_skeleton:
            return len(changed)
        t0 = time.perf_counter()
        extract(self.field, self.grid, changed)
        t1 = time.perf_counter()
        if self.graph is None:
            try:
                self.graph = stg.init(self.field, self.robot.cell, self.config.resolution)
            except stg.NotReadyError:
                pass
        if self.graph is not None:
            stg.update(self.graph, self.field, self.config.step, self.config.thres)
        self.last_skeleton_time = t1 - t0
        self.last_graph_time = time.perf_counter() - t1
        return len(changed)

    def context(self) -> Context:
        return Context(self.grid, self.field, self.graph, self.robot, self.config, self.reach)

    def coverage(self) -> float:
        return coverage(self.grid, self.truth, self.truth.start)


STEPS = {
    FsmState.TOPOLOGY_GUIDED: step_state1,
    FsmState.BRANCH_UPDATE: step_state2,
    FsmState.BACKTRACKING: step_state3,
    FsmState.BOUNDARY_GUIDED: step_state4,
}


def decide(ctx: Context, ex: ExplorerState, rec: TickRecord, errors: list[str]) -> list[Cell] | None:
    """Run the machine from State 1 until it moves or terminates; returns the path to follow."""
    if ex.fsm == FsmState.TERMINATED:
        rec.trace, rec.fsm_state = "6", ex.fsm.name
        return None
    state = FsmState.TOPOLOGY_GUIDED
    trace = []
    path = None
    for _ in range(MAX_TRANSITIONS):
        trace.append(str(state.value))
        if state == FsmState.TERMINATED:
            break
        if state == FsmState.PLANNING_MOVING:
            try:
                nxt, path = step_state5(ctx, ex)
            except planning.UnreachableError as err:
                errors.append(str(err))
                nxt, path = FsmState.TOPOLOGY_GUIDED, None
            if path is not None:
                rec.target = ex.target
                rec.target_kind = "topology" if ex.target_node is not None and not ex.aux else "boundary"
                rec.target_branch = ex.target_branch
                if ex.target_node is not None and ex.target_node in ctx.graph.nodes:
                    rec.target_node_branch = stg.branch_of(ctx.graph, ex.target_node)
                break
            ctx._frontiers = None  # a target was retired
        else:
            nxt = STEPS[state](ctx, ex)
            if state == FsmState.BRANCH_UPDATE and nxt == FsmState.PLANNING_MOVING:
                rec.selected = ex.current_branch
        if nxt not in TRANSITIONS[state]:
            raise PlanningContractError(f"undefined transition {state.name} -> {nxt.name}")
        state = nxt
    ex.fsm = FsmState.TERMINATED if state == FsmState.TERMINATED else FsmState.TOPOLOGY_GUIDED
    rec.trace = ">".join(trace)
    rec.fsm_state = state.name
    return path


def run_episode(truth: GroundTruthMap, config: ExplorerConfig | None = None, observer=None) -> EpisodeLog:
    """Sense, update skeleton and graph, decide, move; until termination or ``max_ticks``.

    ``observer(sim, ex, rec)`` is called after every tick (used for snapshots and checks).
    """
    config = config or ExplorerConfig()
    sim = Simulation(truth, config)
    ex = ExplorerState()
    log = EpisodeLog("stg", truth.name, config.seed, sim.start)
    t_start = time.perf_counter()
    for tick in range(config.max_ticks):
        n_changed = sim.perceive()
        ctx = sim.context()
        rec = TickRecord(tick, 0.0, 0.0, 0.0, sim.last_skeleton_time, sim.last_graph_time, "", "")
        t0 = time.perf_counter()
        path = decide(ctx, ex, rec, log.errors)
        rec.decision_time = time.perf_counter() - t0
        if path:
            sim.robot = advance(sim.robot, path, sim.grid)
        elif ex.fsm != FsmState.TERMINATED:
            log.idle_ticks += 1
        rec.changed = n_changed
        rec.seeds = sim.field.last_seeds
        rec.processed = sim.field.last_processed
        rec.current_branch = ex.current_branch
        rec.branch_live = ex.current_branch is not None and ex.current_branch in live_frontiers(ctx, ex)
        rec.coverage = sim.coverage()
        rec.path_length = sim.robot.path_length()
        log.ticks.append(rec)
        if observer is not None:
            observer(sim, ex, rec)
        if ex.fsm == FsmState.TERMINATED:
            log.terminated = True
            break
    log.wall_time = time.perf_counter() - t_start
    log.pushes, log.pops = ex.pushes, ex.pops
    log.final = (sim, ex)
    return log
