"""Deterministic 2D grid world: ground truth, occupancy map, range sensor and robot.

All lattices are stored with a one-cell padding ring so the hot kernels can
address 8-neighbours without bounds checks.  The ring reads as ``UNKNOWN`` in
the occupancy grid (out-of-bounds cells behave as unknown) and as ``OUTSIDE``
in the ground truth (rays stop there without observing anything).

Cells are addressed as ``(x, y)`` with ``x`` the column and ``y`` the row,
row 0 being the first line of the map file.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, Sequence

import numpy as np

from . import kernels

Cell = tuple[int, int]


class CellState(IntEnum):
    UNKNOWN = 0
    FREE = 1
    OCCUPIED = 2


UNKNOWN, FREE, OCCUPIED = CellState.UNKNOWN, CellState.FREE, CellState.OCCUPIED
OUTSIDE = 3  # ground-truth padding only

SQRT2 = math.sqrt(2.0)


class MapFormatError(ValueError):
    """Raised for malformed map documents; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class InvariantError(RuntimeError):
    pass


class PlanningContractError(RuntimeError):
    pass


def _padded(height: int, width: int, fill: int) -> np.ndarray:
    return np.full((height + 2, width + 2), fill, dtype=np.int8)


class GroundTruthMap:
    def __init__(self, cells: np.ndarray, start: Cell | None = None, name: str = ""):
        cells = np.asarray(cells, dtype=np.int8)
        if cells.ndim != 2 or cells.size == 0:
            raise MapFormatError("empty map")
        self.height, self.width = cells.shape
        self.padded = _padded(self.height, self.width, OUTSIDE)
        self.padded[1:-1, 1:-1] = cells
        self.start = start
        self.name = name
        self._reachable: dict[Cell, np.ndarray] = {}

    @property
    def cells(self) -> np.ndarray:
        return self.padded[1:-1, 1:-1]

    def is_free(self, cell: Cell) -> bool:
        x, y = cell
        return 0 <= x < self.width and 0 <= y < self.height and self.cells[y, x] == FREE

    def free_cells(self) -> list[Cell]:
        ys, xs = np.nonzero(self.cells == FREE)
        return [(int(x), int(y)) for x, y in zip(xs, ys)]

    def reachable_mask(self, start: Cell | None = None) -> np.ndarray:
        """Free cells 8-connected to ``start`` (diagonal squeezes between two walls excluded)."""
        start = start if start is not None else self.start
        if start not in self._reachable:
            self._reachable[start] = flood_fill(self.cells == FREE, start)
        return self._reachable[start]


def flood_fill(passable: np.ndarray, start: Cell) -> np.ndarray:
    h, w = passable.shape
    seen = np.zeros_like(passable, dtype=bool)
    x0, y0 = start
    if not (0 <= x0 < w and 0 <= y0 < h) or not passable[y0, x0]:
        return seen
    seen[y0, x0] = True
    stack = [start]
    while stack:
        x, y = stack.pop()
        for dx, dy in NEIGHBOURS_8:
            nx, ny = x + dx, y + dy
            if not (0 <= nx < w and 0 <= ny < h) or seen[ny, nx] or not passable[ny, nx]:
                continue
            if dx and dy and not _diag_ok(passable, x, y, dx, dy):
                continue
            seen[ny, nx] = True
            stack.append((nx, ny))
    return seen


def _diag_ok(passable, x, y, dx, dy) -> bool:
    h, w = passable.shape
    a = 0 <= x + dx < w and passable[y, x + dx]
    b = 0 <= y + dy < h and passable[y + dy, x]
    return bool(a or b)


# n1 = top, then clockwise
NEIGHBOURS_8: tuple[Cell, ...] = ((0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1))


def load_ground_truth(text: str, name: str = "") -> GroundTruthMap:
    """Parse a map document: ``#`` occupied, ``.`` free, ``S`` start, ``%`` comment lines."""
    rows: list[list[int]] = []
    start: Cell | None = None
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r")
        if line.startswith("%"):
            continue
        if not line:
            raise MapFormatError("blank line inside map body", lineno)
        row = []
        for col, ch in enumerate(line):
            if ch == "#":
                row.append(OCCUPIED)
            elif ch == ".":
                row.append(FREE)
            elif ch == "S":
                if start is not None:
                    raise MapFormatError("more than one start cell 'S'", lineno)
                start = (col, len(rows))
                row.append(FREE)
            else:
                raise MapFormatError(f"invalid character {ch!r} at column {col + 1}", lineno)
        if rows and len(row) != len(rows[0]):
            raise MapFormatError(f"ragged row: expected {len(rows[0])} cells, got {len(row)}", lineno)
        rows.append(row)
    if not rows:
        raise MapFormatError("empty map document", 1)
    return GroundTruthMap(np.array(rows, dtype=np.int8), start=start, name=name)


def load_map_file(path) -> GroundTruthMap:
    from pathlib import Path

    path = Path(path)
    return load_ground_truth(path.read_text(encoding="ascii"), name=path.stem)


class OccupancyGrid:
    def __init__(self, width: int, height: int, resolution: float = 1.0):
        if width < 1 or height < 1:
            raise ValueError("grid dimensions must be >= 1")
        if resolution <= 0:
            raise ValueError("resolution must be positive")
        self.width = width
        self.height = height
        self.resolution = float(resolution)
        self.padded = _padded(height, width, UNKNOWN)
        self.changed: set[Cell] = set()

    @classmethod
    def like(cls, truth: GroundTruthMap, resolution: float = 1.0) -> "OccupancyGrid":
        return cls(truth.width, truth.height, resolution)

    @property
    def cells(self) -> np.ndarray:
        return self.padded[1:-1, 1:-1]

    def in_bounds(self, cell: Cell) -> bool:
        x, y = cell
        return 0 <= x < self.width and 0 <= y < self.height

    def state(self, cell: Cell) -> CellState:
        if not self.in_bounds(cell):
            return UNKNOWN
        x, y = cell
        return CellState(int(self.cells[y, x]))

    def is_free(self, cell: Cell) -> bool:
        return self.in_bounds(cell) and self.cells[cell[1], cell[0]] == FREE

    def set_state(self, cell: Cell, state: CellState) -> bool:
        """Set one cell; returns whether it changed.  Only unknown cells may change."""
        x, y = cell
        cur = self.cells[y, x]
        if cur == state:
            return False
        if cur != UNKNOWN:
            raise InvariantError(f"illegal transition {CellState(int(cur)).name}->{CellState(state).name} at {cell}")
        self.cells[y, x] = state
        self.changed.add(cell)
        return True

    def consume_changes(self) -> set[Cell]:
        out, self.changed = self.changed, set()
        return out

    def known_count(self) -> int:
        return int(np.count_nonzero(self.cells != UNKNOWN))

    def flat(self, cell: Cell) -> int:
        return (cell[1] + 1) * (self.width + 2) + cell[0] + 1

    def unflat(self, idx: int) -> Cell:
        y, x = divmod(int(idx), self.width + 2)
        return (x - 1, y - 1)


@dataclass
class SensorModel:
    range: float = 4.0  # meters
    angular_resolution: float = 2 * math.pi / 720

    def __post_init__(self):
        if self.range <= 0:
            raise ValueError("sensor range must be positive")
        if self.angular_resolution <= 0 or 2 * math.pi / self.angular_resolution < 8 - 1e-9:
            raise ValueError("angular resolution must yield at least 8 rays")

    @property
    def n_rays(self) -> int:
        return max(8, int(round(2 * math.pi / self.angular_resolution)))


@dataclass
class RobotState:
    position: tuple[float, float]  # meters
    speed: float  # meters per tick
    cell: Cell
    trajectory: list[tuple[float, float]] = field(default_factory=list)
    travelled: float = 0.0  # meters along the trajectory

    @classmethod
    def at_cell(cls, cell: Cell, resolution: float, speed: float) -> "RobotState":
        pos = cell_center(cell, resolution)
        return cls(position=pos, speed=speed, cell=cell, trajectory=[pos])

    def path_length(self) -> float:
        return self.travelled


def cell_center(cell: Cell, resolution: float) -> tuple[float, float]:
    return ((cell[0] + 0.5) * resolution, (cell[1] + 0.5) * resolution)


def sense(truth: GroundTruthMap, grid: OccupancyGrid, robot: RobotState, sensor: SensorModel) -> set[Cell]:
    """Cast the 360-degree range sensor and write observations into ``grid``.

    A cell is observed when a ray enters it and its centre lies within range.
    Rays stop at the first ground-truth occupied cell; when a ray passes exactly
    through a lattice corner both side cells are entered, so no diagonal leak.
    """
    if not truth.is_free(robot.cell):
        raise InvariantError(f"robot at {robot.cell} is not on free ground truth")
    res = grid.resolution
    rx, ry = robot.position[0] / res, robot.position[1] / res
    idx = kernels.cast_rays(truth.padded, grid.padded, rx, ry, sensor.range / res, sensor.n_rays)
    changed = {grid.unflat(i) for i in idx}
    grid.changed |= changed
    return changed


def advance(robot: RobotState, path: Sequence[Cell], grid: OccupancyGrid) -> RobotState:
    """Move the robot along ``path`` (cell centres) by at most ``robot.speed`` meters.

    ``path[0]`` must be the robot's current cell.  Returns a new state; the
    robot's cell is the path cell it is currently nearest to along the
    followed segment.
    """
    if not path:
        return robot
    if tuple(path[0]) != tuple(robot.cell):
        raise PlanningContractError(f"path starts at {path[0]}, robot is at {robot.cell}")
    for a, b in zip(path, path[1:]):
        if max(abs(a[0] - b[0]), abs(a[1] - b[1])) != 1:
            raise PlanningContractError(f"non-adjacent path step {a}->{b}")
    for c in path:
        if not grid.is_free(c):
            raise PlanningContractError(f"path crosses non-free cell {c}")
    res = grid.resolution
    budget = robot.speed
    pos = robot.position
    cell = robot.cell
    traj = list(robot.trajectory)
    travelled = robot.travelled
    legs = list(path)
    if len(legs) >= 2 and _on_segment(pos, cell_center(legs[0], res), cell_center(legs[1], res)):
        # already part-way along the first leg: do not step back to its start
        legs = legs[1:]
    for nxt in legs:
        target = cell_center(nxt, res)
        seg = math.dist(pos, target)
        if seg == 0.0:
            continue
        if seg <= budget + 1e-12:
            budget -= seg
            pos, cell = target, nxt
            traj.append(pos)
            travelled += seg
            if budget <= 1e-12:
                break
            continue
        f = budget / seg
        start = pos
        pos = (pos[0] + (target[0] - pos[0]) * f, pos[1] + (target[1] - pos[1]) * f)
        traj.append(pos)
        travelled += math.dist(start, pos)
        # nearer endpoint of the segment owns the robot
        if math.dist(pos, target) < math.dist(pos, start):
            cell = nxt
        budget = 0.0
        break
    return RobotState(position=pos, speed=robot.speed, cell=cell, trajectory=traj, travelled=travelled)


def _on_segment(p, a, b) -> bool:
    abx, aby = b[0] - a[0], b[1] - a[1]
    apx, apy = p[0] - a[0], p[1] - a[1]
    if abs(abx * apy - aby * apx) > 1e-9:
        return False
    t = (abx * apx + aby * apy) / (abx * abx + aby * aby)
    return 0.0 <= t <= 1.0


def coverage(grid: OccupancyGrid, truth: GroundTruthMap, start: Cell | None = None) -> float:
    reach = truth.reachable_mask(start)
    total = int(reach.sum())
    if total == 0:
        return 0.0
    seen = int(np.count_nonzero((grid.cells == FREE) & reach))
    return min(1.0, seen / total)


def observed_free_cells(grid: OccupancyGrid) -> Iterable[Cell]:
    ys, xs = np.nonzero(grid.cells == FREE)
    return ((int(x), int(y)) for x, y in zip(xs, ys))
