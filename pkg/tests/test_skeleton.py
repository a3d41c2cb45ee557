import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import ndimage

from stgexplore.skeleton import (
    DELETABLE_TABLE, WF_INF, Neighborhood, SkeletonField, batch_extract, count_nonzero,
    count_transitions, deletable, extract, neighbor_present, render_ascii, wavefront_csv,
)
from stgexplore.world import FREE, OCCUPIED, UNKNOWN, OccupancyGrid, RobotState, SensorModel, sense

from conftest import FIXTURES, fully_observed, grid_from_rows, load_fixture
from oracles import INF, zhang_suen, zs_conditions


def _window(bits):
    nb = Neighborhood.from_bits(bits)
    w = np.zeros((3, 3), np.uint8)
    w[1, 1] = 1
    # n1 top, then clockwise
    for (y, x), v in zip([(0, 1), (0, 2), (1, 2), (2, 2), (2, 1), (2, 0), (1, 0), (0, 0)], nb):
        w[y, x] = v
    return nb, w


@pytest.mark.parametrize("phase", [1, 2])
def test_deletable_matches_literal_conditions(phase):
    for bits in range(256):
        nb, w = _window(bits)
        assert deletable(nb, phase) == zs_conditions(w, phase), bits
        assert DELETABLE_TABLE[(phase - 1) * 256 + bits] == deletable(nb, phase)


def test_transition_counts():
    assert count_transitions(Neighborhood(*[0] * 8)) == 0
    assert count_transitions(Neighborhood(1, 0, 1, 0, 1, 0, 1, 0)) == 4
    assert count_transitions(Neighborhood(*[1] * 8)) == 0
    assert count_nonzero(Neighborhood(*[1] * 8)) == 8
    assert count_nonzero(Neighborhood(0, 0, 0, 1, 0, 0, 0, 0)) == 1


def test_deletable_edge_cases():
    for phase in (1, 2):
        assert not deletable(Neighborhood(*[1] * 8), phase)
        assert not deletable(Neighborhood(*[0] * 8), phase)
    with pytest.raises(ValueError):
        deletable(Neighborhood(1, 1, 0, 0, 0, 0, 0, 0), 3)


@given(st.integers(0, 255))
def test_bits_roundtrip(bits):
    assert Neighborhood.from_bits(bits).bits == bits


def _observed(rows):
    truth = grid_from_rows(rows)
    return truth, fully_observed(truth)


def test_corridor_survives():
    truth, grid = _observed(["#" * 12, "#" + "." * 10 + "#", "#" * 12])
    field = batch_extract(grid)
    assert field.skeleton_cells() == {(x, 1) for x in range(1, 11)}


def test_three_by_three_block():
    truth, grid = _observed(["#####", "#...#", "#...#", "#...#", "#####"])
    assert batch_extract(grid).skeleton_cells() == {(2, 2)}


def test_nine_by_nine_room():
    rows = ["#" * 11] + ["#" + "." * 9 + "#"] * 9 + ["#" * 11]
    truth, grid = _observed(rows)
    field = batch_extract(grid)
    sk, _ = zhang_suen(truth.cells == FREE)
    assert field.skeleton_mask.tolist() == sk.tolist()
    assert (5, 5) in field.skeleton_cells()
    assert ndimage.label(field.skeleton_mask, np.ones((3, 3)))[1] == 1


def test_neighbor_present_replay():
    rows = ["#" * 11] + ["#" + "." * 9 + "#"] * 9 + ["#" * 11]
    truth, grid = _observed(rows)
    field = batch_extract(grid)
    assert neighbor_present(field, (5, 5), 10**6) == 1
    by_wave = {}
    for y in range(9):
        for x in range(9):
            w = field.wave_of((x + 1, y + 1))
            if w != WF_INF:
                by_wave.setdefault(w, (x + 1, y + 1))
    c4 = by_wave[4]
    c2 = by_wave[2]
    assert neighbor_present(field, c4, 3) == 1
    assert neighbor_present(field, c2, 5) == 0
    # replay oracle: the cell is still present after 3 subiterations
    _, wave = zhang_suen(truth.cells == FREE)
    assert wave[c4[1], c4[0]] == 4 and wave[c2[1], c2[0]] == 2


@pytest.mark.parametrize("name", FIXTURES)
def test_batch_matches_textbook_thinning(name):
    truth = load_fixture(name)
    field = batch_extract(fully_observed(truth))
    sk, wave = zhang_suen(truth.cells == FREE)
    free = truth.cells == FREE
    assert np.array_equal(field.skeleton_mask, sk)
    ours = np.where(field.wave[1:-1, 1:-1] == WF_INF, INF, field.wave[1:-1, 1:-1])
    assert np.array_equal(np.where(free, ours, INF), np.where(free, wave, INF))
    # every removed cell came from an obstacle wave on a fully observed map
    assert not field.unknown_wave_mask().any()


# frozen from the textbook oracle above
SKELETON_SIZES = {"room_small": 4, "corridor": 38, "y_maze": 51, "ring": 80, "maze_small": 128, "maze_medium": 1426}


@pytest.mark.parametrize("name", FIXTURES)
def test_skeleton_sizes_frozen(name):
    assert len(batch_extract(fully_observed(load_fixture(name))).skeleton_cells()) == SKELETON_SIZES[name]


@pytest.mark.parametrize("name", FIXTURES)
def test_topology_preserved(name):
    truth = load_fixture(name)
    field = batch_extract(fully_observed(truth))
    eight = np.ones((3, 3))
    assert ndimage.label(field.skeleton_mask, eight)[1] == ndimage.label(truth.cells == FREE, eight)[1]
    sk = np.pad(field.skeleton_mask, 1).astype(np.uint8)
    for y, x in zip(*np.nonzero(sk)):
        w = sk[y - 1:y + 2, x - 1:x + 2]
        assert not zs_conditions(w, 1) and not zs_conditions(w, 2)


def test_no_changes_is_identity():
    truth = load_fixture("y_maze")
    grid = fully_observed(truth)
    field = batch_extract(grid)
    before = field.copy()
    extract(field, grid, [])
    assert field.equals(before)
    assert field.last_processed == 0


def test_batch_deterministic():
    grid = fully_observed(load_fixture("ring"))
    assert batch_extract(grid).equals(batch_extract(grid))


def _episode_fields(name, seed, steps, rng_cells):
    truth = load_fixture(name)
    grid = OccupancyGrid.like(truth)
    field = SkeletonField.virgin(grid)
    rng = np.random.default_rng(seed)
    cells = np.argwhere(truth.reachable_mask(truth.start))
    pos = truth.start
    for _ in range(steps):
        sense(truth, grid, RobotState.at_cell(pos, 1.0, 1.0), SensorModel(float(rng.integers(3, 7))))
        extract(field, grid, grid.consume_changes())
        # hop to a random observed-free reachable cell (teleporting sensor)
        seen = [tuple(c[::-1]) for c in cells if grid.cells[c[0], c[1]] == FREE]
        pos = seen[rng.integers(len(seen))] if rng_cells else pos
    return truth, grid, field


@given(st.integers(0, 10**6), st.integers(1, 6))
def test_incremental_equals_batch_y_maze(seed, steps):
    _, grid, field = _episode_fields("y_maze", seed, steps, True)
    assert field.equals(batch_extract(grid))


@given(st.integers(0, 10**6))
def test_incremental_equals_batch_random_maps(seed):
    rng = np.random.default_rng(seed)
    cells = np.where(rng.random((14, 16)) < 0.75, FREE, OCCUPIED).astype(np.int8)
    cells[[0, -1], :] = OCCUPIED
    cells[:, [0, -1]] = OCCUPIED
    from stgexplore.world import GroundTruthMap
    truth = GroundTruthMap(cells)
    grid = OccupancyGrid.like(truth)
    field = SkeletonField.virgin(grid)
    free = truth.free_cells()
    if not free:
        return
    for _ in range(4):
        c = free[rng.integers(len(free))]
        sense(truth, grid, RobotState.at_cell(c, 1.0, 1.0), SensorModel(float(rng.integers(2, 6))))
        extract(field, grid, grid.consume_changes())
        assert field.equals(batch_extract(grid))


def test_incremental_work_is_local():
    truth, grid, field = _episode_fields("maze_medium", 3, 25, True)
    assert field.equals(batch_extract(grid))
    assert field.last_processed < batch_extract(grid).last_processed


def test_unknown_wave_reset():
    truth = load_fixture("room_small")
    grid = OccupancyGrid.like(truth)
    field = SkeletonField.virgin(grid)
    sense(truth, grid, RobotState.at_cell(truth.start, 1.0, 1.0), SensorModel(3.0))
    extract(field, grid, grid.consume_changes())
    uw = field.unknown_wave_mask()
    assert uw.any()
    assert (field.wave[1:-1, 1:-1][uw] == WF_INF).all()


def test_render_and_csv():
    truth, grid = _observed(["#####", "#...#", "#...#", "#...#", "#####"])
    field = batch_extract(grid)
    art = render_ascii(field).splitlines()
    assert art[2] == "#o*o#"
    assert art[0] == "#####"
    rows = wavefront_csv(field).splitlines()
    assert len(rows) == 5
    assert rows[2].split(",")[2] == ""
    assert rows[0] == ",,,,"
