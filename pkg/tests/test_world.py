import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from stgexplore.world import (
    FREE, OCCUPIED, UNKNOWN, GroundTruthMap, InvariantError, MapFormatError, OccupancyGrid,
    PlanningContractError, RobotState, SensorModel, advance, cell_center, coverage, flood_fill,
    load_ground_truth, sense,
)

from conftest import fully_observed, grid_from_rows, load_fixture


def test_parse_tiny_map():
    m = load_ground_truth("###\n#.#\n###")
    assert (m.width, m.height) == (3, 3)
    assert m.free_cells() == [(1, 1)]


def test_parse_start_and_comments():
    m = load_ground_truth("% a comment\n#####\n#S..#\n#####\n\n")
    assert m.start == (1, 1)
    assert m.is_free((1, 1))


@pytest.mark.parametrize("text,line", [
    ("###\n####\n", 2),
    ("###\n#x#\n###", 2),
    ("", 1),
    ("% only comment", 1),
    ("###\n\n###", 2),
    ("#S#\n#S#", 2),
])
def test_parse_errors_name_line(text, line):
    with pytest.raises(MapFormatError) as err:
        load_ground_truth(text)
    assert err.value.line == line
    assert f"line {line}" in str(err.value)


def test_bundled_fixture_counts():
    m = load_fixture("maze_small")
    text = open(m_path("maze_small")).read()
    assert sum(ch in ".S" for ch in text) == len(m.free_cells()) == 1144
    assert (m.width, m.height) == (40, 40)


def m_path(name):
    from importlib import resources
    return resources.files("stgexplore") / "maps" / f"{name}.txt"


def test_grid_validation():
    with pytest.raises(ValueError):
        OccupancyGrid(0, 3)
    with pytest.raises(ValueError):
        OccupancyGrid(3, 3, resolution=0)
    with pytest.raises(ValueError):
        SensorModel(range=0)
    with pytest.raises(ValueError):
        SensorModel(angular_resolution=1.0)


def test_illegal_transition():
    g = OccupancyGrid(2, 2)
    g.set_state((0, 0), FREE)
    assert not g.set_state((0, 0), FREE)
    with pytest.raises(InvariantError):
        g.set_state((0, 0), OCCUPIED)


def test_out_of_bounds_reads_unknown():
    g = OccupancyGrid(2, 2)
    assert g.state((-1, 0)) == UNKNOWN
    assert g.state((5, 5)) == UNKNOWN


def _setup(rows, cell, rng=4.0, res=1.0):
    truth = grid_from_rows(rows)
    grid = OccupancyGrid.like(truth, res)
    robot = RobotState.at_cell(cell, res, 1.0)
    return truth, grid, robot, SensorModel(range=rng)


def test_sense_walled_cell():
    truth, grid, robot, sensor = _setup(["###", "#.#", "###"], (1, 1))
    changed = sense(truth, grid, robot, sensor)
    assert (1, 1) in changed
    walls = changed - {(1, 1)}
    assert len(walls) <= 8
    assert all(grid.state(c) == OCCUPIED for c in walls)
    # diagonal corners hide behind the two side walls a corner ray touches
    assert walls == {(0, 1), (2, 1), (1, 0), (1, 2)}


def test_sense_idempotent():
    truth = load_fixture("maze_small")
    grid = OccupancyGrid.like(truth)
    robot = RobotState.at_cell(truth.start, 1.0, 1.0)
    assert sense(truth, grid, robot, SensorModel(5.0))
    assert sense(truth, grid, robot, SensorModel(5.0)) == set()


def test_sense_open_room_disc():
    # brute-force distance check over the lattice
    truth = GroundTruthMap(np.full((21, 21), FREE, np.int8))
    grid = OccupancyGrid.like(truth)
    robot = RobotState.at_cell((10, 10), 1.0, 1.0)
    changed = sense(truth, grid, robot, SensorModel(5.0))
    expected = {(x, y) for x in range(21) for y in range(21) if math.hypot(x - 10, y - 10) <= 5.0}
    assert changed == expected


def test_sense_no_corner_leak():
    rows = [
        "#######",
        "#..#..#",
        "#..#..#",
        "###.###",
        "#..#..#",
        "#######",
    ]
    truth, grid, robot, sensor = _setup(rows, (1, 1), rng=10.0)
    sense(truth, grid, robot, sensor)
    assert grid.state((4, 1)) == UNKNOWN
    assert grid.state((1, 4)) == UNKNOWN


def test_sense_on_wall_raises():
    truth, grid, _, sensor = _setup(["###", "#.#", "###"], (1, 1))
    with pytest.raises(InvariantError):
        sense(truth, grid, RobotState.at_cell((0, 0), 1.0, 1.0), sensor)


def test_changed_set_exact():
    truth = load_fixture("y_maze")
    grid = OccupancyGrid.like(truth)
    robot = RobotState.at_cell(truth.start, 1.0, 1.0)
    before = grid.cells.copy()
    changed = sense(truth, grid, robot, SensorModel(6.0))
    diff = {(int(x), int(y)) for y, x in zip(*np.nonzero(before != grid.cells))}
    assert changed == diff == grid.consume_changes()
    assert grid.changed == set()


def _open_grid(w=10, h=10, res=1.0):
    g = OccupancyGrid(w, h, res)
    g.cells[:] = FREE
    return g


def test_advance_empty_path():
    g = _open_grid()
    r = RobotState.at_cell((0, 0), 1.0, 2.0)
    assert advance(r, [], g) is r


def test_advance_straight():
    g = _open_grid()
    r = RobotState.at_cell((0, 0), 1.0, 2.0)
    r2 = advance(r, [(i, 0) for i in range(5)], g)
    assert r2.cell == (2, 0)
    assert r2.position == cell_center((2, 0), 1.0)


def test_advance_diagonal_then_straight():
    res = 0.5
    g = _open_grid(res=res)
    r = RobotState.at_cell((0, 0), res, 1.5 * res)
    r2 = advance(r, [(0, 0), (1, 1), (2, 1)], g)
    arc = r2.path_length()
    assert arc == pytest.approx(1.5 * res, rel=1e-12)
    # along the second step, past the diagonal
    along = 1.5 - math.sqrt(2)
    assert r2.position[0] == pytest.approx((1.5 + along) * res)
    assert r2.position[1] == pytest.approx(1.5 * res)


def test_advance_contract():
    g = _open_grid()
    g.cells[0, 2] = OCCUPIED
    r = RobotState.at_cell((0, 0), 1.0, 1.0)
    with pytest.raises(PlanningContractError):
        advance(r, [(1, 0), (2, 0)], g)
    with pytest.raises(PlanningContractError):
        advance(r, [(0, 0), (2, 0)], g)
    with pytest.raises(PlanningContractError):
        advance(r, [(0, 0), (1, 0), (2, 0)], g)


@given(st.lists(st.sampled_from([(1, 0), (0, 1), (1, 1)]), min_size=1, max_size=12),
       st.floats(0.3, 3.0))
def test_advance_arc_length(steps, speed):
    g = _open_grid(20, 20)
    path = [(0, 0)]
    for dx, dy in steps:
        path.append((path[-1][0] + dx, path[-1][1] + dy))
    r = RobotState.at_cell((0, 0), 1.0, speed)
    total = 0.0
    prev = r.path_length()
    for _ in range(40):
        i = path.index(r.cell)
        if i == len(path) - 1 and r.position == cell_center(r.cell, 1.0):
            break
        r = advance(r, path[i:], g)
        step = r.path_length() - prev
        assert step <= speed + 1e-9
        total += step
        prev = r.path_length()
    traj = r.trajectory
    arc = sum(math.dist(a, b) for a, b in zip(traj, traj[1:]))
    assert total == pytest.approx(arc, rel=1e-9)
    assert r.path_length() == pytest.approx(arc, rel=1e-9)


def test_coverage_extremes():
    truth = load_fixture("ring")
    assert coverage(OccupancyGrid.like(truth), truth) == 0.0
    assert coverage(fully_observed(truth), truth) == 1.0


def test_coverage_after_one_sense():
    truth = load_fixture("maze_small")
    grid = OccupancyGrid.like(truth)
    robot = RobotState.at_cell(truth.start, 1.0, 1.0)
    sense(truth, grid, robot, SensorModel(5.0))
    # independent: BFS flood count and a distance mask
    from collections import deque
    free = truth.cells == FREE
    seen = {truth.start}
    q = deque([truth.start])
    while q:
        x, y = q.popleft()
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                n = (x + dx, y + dy)
                if n in seen or not (0 <= n[0] < truth.width and 0 <= n[1] < truth.height) or not free[n[1], n[0]]:
                    continue
                if dx and dy and not (free[y, x + dx] or free[y + dy, x]):
                    continue
                seen.add(n)
                q.append(n)
    observed = {c for c in seen if grid.state(c) == FREE}
    assert all(math.dist(c, truth.start) <= 5.0 for c in observed)
    assert coverage(grid, truth) == pytest.approx(len(observed) / len(seen))


@given(st.integers(0, 2**32 - 1))
def test_flood_fill_matches_scipy_when_no_squeezes(seed):
    from scipy import ndimage
    rng = np.random.default_rng(seed)
    free = rng.random((12, 12)) < 0.6
    free[0, 0] = True
    lab, _ = ndimage.label(free, structure=np.ones((3, 3)))
    ours = flood_fill(free, (0, 0))
    assert not (ours & ~(lab == lab[0, 0])).any()
    assert ours[0, 0]


@given(st.integers(0, 1000), st.integers(0, 40), st.integers(0, 40))
def test_monotone_known_cells(seed, x, y):
    truth = load_fixture("maze_small")
    if not truth.is_free((x, y)):
        return
    grid = OccupancyGrid.like(truth)
    rng = np.random.default_rng(seed)
    cells = truth.free_cells()
    known = 0
    for _ in range(3):
        c = cells[rng.integers(len(cells))]
        sense(truth, grid, RobotState.at_cell(c, 1.0, 1.0), SensorModel(4.0))
        assert grid.known_count() >= known
        known = grid.known_count()
