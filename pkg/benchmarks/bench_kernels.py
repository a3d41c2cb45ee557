"""Compare the compiled kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Each kernel runs on the bundled maze_medium map with identical inputs under
both backends; outputs are checked for equality before timings are printed.
"""
import argparse
import time
from importlib import resources

import numpy as np

from stgexplore import kernels
from stgexplore.skeleton import DELETABLE_TABLE, SkeletonField
from stgexplore.world import FREE, OccupancyGrid, load_map_file


def load():
    path = resources.files("stgexplore") / "maps" / "maze_medium.txt"
    return load_map_file(str(path))


def cases(truth):
    full = OccupancyGrid.like(truth)
    full.padded[1:-1, 1:-1] = truth.cells
    passable = (full.padded == FREE).astype(np.uint8)
    free = np.argwhere(truth.cells == FREE)
    a = full.flat(tuple(int(v) for v in free[0][::-1]))
    b = full.flat(tuple(int(v) for v in free[-1][::-1]))

    def rays():
        grid = OccupancyGrid.like(truth)
        sx, sy = truth.start
        return kernels.cast_rays(truth.padded, grid.padded, sx + 0.5, sy + 0.5, 8.0, 720)

    def thin():
        f = SkeletonField(truth.width, truth.height)
        np.copyto(f.occ, full.padded)
        seeds = np.flatnonzero(f.occ.ravel() != 0)
        kernels.thin(f.occ, f.state, f.wave, seeds, -1, DELETABLE_TABLE)
        return f.wave.copy()

    return {
        "cast_rays (720 rays, 8 cells)": rays,
        "thin (full map, batch)": thin,
        "astar (corner to corner)": lambda: kernels.astar(passable, a, b)[0],
        "dijkstra (whole map)": lambda: kernels.dijkstra(passable, a),
    }


def timeit(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    truth = load()
    names = ["cython", "python"]
    try:
        kernels.use("cython")
    except ImportError:
        print("compiled extension not built; only the pure backend is available")
        names = ["python"]
    results = {}
    for name in names:
        kernels.use(name)
        for label, fn in cases(truth).items():
            results[(name, label)] = timeit(fn, args.repeat)
    print(f"{'kernel':<32} {'cython ms':>10} {'python ms':>10} {'speedup':>8}")
    for label in cases(truth):
        py_t, py_out = results[("python", label)]
        if "cython" in names:
            cy_t, cy_out = results[("cython", label)]
            same = np.array_equal(np.asarray(cy_out, dtype=object if isinstance(cy_out, list) else None), np.asarray(py_out, dtype=object if isinstance(py_out, list) else None))
            assert same, f"backends disagree on {label}"
            print(f"{label:<32} {cy_t * 1e3:>10.2f} {py_t * 1e3:>10.2f} {py_t / cy_t:>7.1f}x")
        else:
            print(f"{label:<32} {'-':>10} {py_t * 1e3:>10.2f} {'-':>8}")
    kernels.use("cython" if "cython" in names else "python")


if __name__ == "__main__":
    main()
