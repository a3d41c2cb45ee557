from importlib import resources

import numpy as np
import pytest
from hypothesis import settings

from stgexplore import kernels
from stgexplore.world import GroundTruthMap, OccupancyGrid, load_map_file

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

FIXTURES = ("room_small", "corridor", "y_maze", "ring", "maze_small", "maze_medium")


def load_fixture(name: str) -> GroundTruthMap:
    return load_map_file(str(resources.files("stgexplore") / "maps" / f"{name}.txt"))


def fully_observed(truth: GroundTruthMap) -> OccupancyGrid:
    grid = OccupancyGrid.like(truth)
    grid.padded[1:-1, 1:-1] = truth.cells
    return grid


def grid_from_rows(rows, start=None) -> GroundTruthMap:
    cells = np.array([[2 if ch == "#" else 1 for ch in row] for row in rows], dtype=np.int8)
    return GroundTruthMap(cells, start)


@pytest.fixture(params=["python", "cython"])
def backend(request):
    try:
        kernels.use(request.param)
    except ImportError:
        pytest.skip("compiled extension not built")
    yield request.param
    kernels.use("cython" if _has_cython() else "python")


def _has_cython():
    try:
        from stgexplore import _kernels  # noqa: F401
    except ImportError:
        return False
    return True


ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def criterion(capsys):
    """``criterion(n, ok, detail)`` records and prints one pass/fail line."""

    def record(n: int, ok: bool, detail: str) -> bool:
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}"
        ACCEPTANCE[n] = line
        with capsys.disabled():
            print(f"\n{line}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
