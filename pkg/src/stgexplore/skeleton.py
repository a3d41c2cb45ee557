"""Incremental skeleton extraction by two-phase wavefront thinning.

Every free cell that thinning removes records the iteration that removed it
(its wavefront) and whether the wave came from an obstacle or from unknown
space.  Because the recorded wavefronts reconstruct which cells were present
at any earlier iteration, a map update only replays the thinning history
around the changed cells instead of re-thinning the whole map.
"""
from __future__ import annotations

import io
from typing import Iterable, NamedTuple

import numpy as np

from . import kernels
from .world import FREE, OCCUPIED, UNKNOWN, Cell, CellState, OccupancyGrid

WF_INF = kernels.WF_INF


class Neighborhood(NamedTuple):
    """Presence bits of the 8 neighbours; ``n1`` is the top neighbour, then clockwise."""

    n1: int
    n2: int
    n3: int
    n4: int
    n5: int
    n6: int
    n7: int
    n8: int

    @classmethod
    def from_bits(cls, bits: int) -> "Neighborhood":
        return cls(*((bits >> i) & 1 for i in range(8)))

    @property
    def bits(self) -> int:
        return sum(b << i for i, b in enumerate(self))


def count_transitions(nb: Neighborhood) -> int:
    """Number of 0->1 transitions in the cyclic sequence n1, ..., n8, n1."""
    return sum(1 for i in range(8) if nb[i] == 0 and nb[(i + 1) % 8] == 1)


def count_nonzero(nb: Neighborhood) -> int:
    return sum(nb)


def deletable(nb: Neighborhood, phase: int) -> bool:
    if count_transitions(nb) != 1 or not 2 <= count_nonzero(nb) <= 6:
        return False
    n1, _, n3, _, n5, _, n7, _ = nb
    if phase == 1:
        return n1 * n3 * n5 == 0 and n3 * n5 * n7 == 0
    if phase == 2:
        return n1 * n3 * n7 == 0 and n1 * n5 * n7 == 0
    raise ValueError(f"phase must be 1 or 2, got {phase}")


def _build_table() -> np.ndarray:
    table = np.zeros(512, dtype=np.uint8)
    for bits in range(256):
        nb = Neighborhood.from_bits(bits)
        table[bits] = deletable(nb, 1)
        table[256 + bits] = deletable(nb, 2)
    return table


DELETABLE_TABLE = _build_table()


class SkeletonField:
    """Per-cell skeleton state and wavefront over a padded lattice.

    ``state`` reads FREE for surviving skeleton candidates, OCCUPIED for cells
    removed by obstacle waves (and real obstacles) and UNKNOWN for cells
    removed by unknown-originated waves (and unobserved cells).
    """

    def __init__(self, width: int, height: int):
        self.width = width
        self.height = height
        self.occ = np.zeros((height + 2, width + 2), dtype=np.int8)
        self.state = np.zeros((height + 2, width + 2), dtype=np.int8)
        self.wave = np.full((height + 2, width + 2), WF_INF, dtype=np.int32)
        # bookkeeping of the last extract() call
        self.last_processed = 0
        self.last_iterations = 0
        self.last_seeds = 0
        self.last_changed = 0

    @classmethod
    def virgin(cls, grid: OccupancyGrid) -> "SkeletonField":
        return cls(grid.width, grid.height)

    def copy(self) -> "SkeletonField":
        out = SkeletonField(self.width, self.height)
        out.occ[...] = self.occ
        out.state[...] = self.state
        out.wave[...] = self.wave
        return out

    def in_bounds(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.width and 0 <= cell[1] < self.height

    def state_of(self, cell: Cell) -> CellState:
        if not self.in_bounds(cell):
            return UNKNOWN
        return CellState(int(self.state[cell[1] + 1, cell[0] + 1]))

    def wave_of(self, cell: Cell) -> int:
        return int(self.wave[cell[1] + 1, cell[0] + 1])

    def occupancy_of(self, cell: Cell) -> CellState:
        if not self.in_bounds(cell):
            return UNKNOWN
        return CellState(int(self.occ[cell[1] + 1, cell[0] + 1]))

    def is_skeleton(self, cell: Cell) -> bool:
        return self.in_bounds(cell) and self.state[cell[1] + 1, cell[0] + 1] == FREE and self.occ[cell[1] + 1, cell[0] + 1] == FREE

    @property
    def skeleton_mask(self) -> np.ndarray:
        inner = np.s_[1:-1, 1:-1]
        return (self.state[inner] == FREE) & (self.occ[inner] == FREE)

    def skeleton_cells(self) -> set[Cell]:
        ys, xs = np.nonzero(self.skeleton_mask)
        return {(int(x), int(y)) for x, y in zip(xs, ys)}

    def unknown_wave_mask(self) -> np.ndarray:
        inner = np.s_[1:-1, 1:-1]
        return (self.state[inner] == UNKNOWN) & (self.occ[inner] == FREE)

    def equals(self, other: "SkeletonField") -> bool:
        return (
            np.array_equal(self.occ, other.occ)
            and np.array_equal(self.state, other.state)
            and np.array_equal(self.wave, other.wave)
        )


def neighbor_present(field: SkeletonField, cell: Cell, iteration: int) -> int:
    """1 iff ``cell`` is skeleton-free now or was still present when wave ``iteration`` ran."""
    if not field.in_bounds(cell) or field.occupancy_of(cell) != FREE:
        return 0
    st = field.state_of(cell)
    if st == FREE:
        return 1
    wf = field.wave_of(cell)
    return int(wf != WF_INF and wf >= iteration)


def extract(field: SkeletonField, grid: OccupancyGrid, changed: Iterable[Cell]) -> SkeletonField:
    """Bring ``field`` up to date with ``grid`` after the cells in ``changed`` were observed.

    Unknown-wave cells left by the previous call are reprocessed together with
    the changed cells; at the end unknown-wave cells have their wavefront
    reset so the next observation reprocesses them again.
    """
    np.copyto(field.occ, grid.padded)
    wp = grid.width + 2
    changed = list(changed)
    seeds = [(y + 1) * wp + x + 1 for x, y in changed]
    pending = np.flatnonzero((field.occ == FREE).ravel() & (field.state == UNKNOWN).ravel())
    field.last_changed = len(changed)
    if not seeds and pending.size == 0:
        field.last_processed = field.last_iterations = field.last_seeds = 0
        return field
    all_seeds = np.unique(np.concatenate([np.asarray(seeds, dtype=np.int64), pending.astype(np.int64)]))
    finite = field.wave[field.wave != WF_INF]
    maxwf = int(finite.max()) if finite.size else -1
    processed, iterations = kernels.thin(field.occ, field.state, field.wave, all_seeds, maxwf, DELETABLE_TABLE)
    field.last_processed = processed
    field.last_iterations = iterations
    field.last_seeds = int(all_seeds.size)
    return field


def batch_extract(grid: OccupancyGrid) -> SkeletonField:
    """Reference: thin the whole observed map from a virgin field."""
    field = SkeletonField.virgin(grid)
    ys, xs = np.nonzero(grid.cells != UNKNOWN)
    return extract(field, grid, [(int(x), int(y)) for x, y in zip(xs, ys)])


def linked_unknown_mask(unknown: np.ndarray, free: np.ndarray) -> np.ndarray:
    """Cells (unpadded) with an 8-neighbour flagged in ``unknown`` (padded masks).

    A diagonal neighbour only counts when one of the two cells between them is
    free, so unknown cells tucked behind a wall corner do not count.
    """
    h, w = unknown.shape[0] - 2, unknown.shape[1] - 2

    def sh(a, dx, dy):
        return a[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]

    out = sh(unknown, 0, -1) | sh(unknown, 1, 0) | sh(unknown, 0, 1) | sh(unknown, -1, 0)
    for dx, dy in ((1, -1), (1, 1), (-1, 1), (-1, -1)):
        out |= sh(unknown, dx, dy) & (sh(free, dx, 0) | sh(free, 0, dy))
    return out


def skeleton_unknown_adjacent(field: SkeletonField) -> np.ndarray:
    """Cells next to a cell whose skeleton state reads unknown."""
    return linked_unknown_mask(field.state == UNKNOWN, field.occ == FREE)


def render_ascii(field: SkeletonField) -> str:
    """``*`` skeleton, ``o`` obstacle wave, ``?`` unknown wave, ``#`` obstacle, blank unseen."""
    inner = np.s_[1:-1, 1:-1]
    occ, st = field.occ[inner], field.state[inner]
    rows = []
    for y in range(field.height):
        chars = []
        for x in range(field.width):
            o, s = occ[y, x], st[y, x]
            if o == FREE:
                chars.append("*" if s == FREE else "o" if s == OCCUPIED else "?")
            elif o == OCCUPIED:
                chars.append("#")
            else:
                chars.append(" ")
        rows.append("".join(chars))
    return "\n".join(rows) + "\n"


def wavefront_csv(field: SkeletonField) -> str:
    """Wavefront lattice as CSV; empty entries for cells never removed by thinning."""
    buf = io.StringIO()
    wave = field.wave[1:-1, 1:-1]
    for y in range(field.height):
        buf.write(",".join("" if v == WF_INF else str(int(v)) for v in wave[y]))
        buf.write("\n")
    return buf.getvalue()
