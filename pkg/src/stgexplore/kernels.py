"""Kernel backend selection.

The compiled extension is used when it imports; ``STGEXPLORE_PURE=1`` forces
the pure-Python fallback.  Both expose ``cast_rays``, ``thin``, ``astar`` and
``dijkstra`` with identical results.
"""
import os

from . import _kernels_py

WF_INF = _kernels_py.WF_INF

_backend = _kernels_py
BACKEND = "python"
if os.environ.get("STGEXPLORE_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined]
    except ImportError:  # extension not built
        _compiled = None
    if _compiled is not None:
        _backend = _compiled
        BACKEND = "cython"


def use(name: str) -> None:
    """Switch backend at runtime (``"python"`` or ``"cython"``); used by tests and benchmarks."""
    global _backend, BACKEND
    if name == "python":
        _backend, BACKEND = _kernels_py, "python"
    elif name == "cython":
        from . import _kernels as compiled

        _backend, BACKEND = compiled, "cython"
    else:
        raise ValueError(f"unknown kernel backend {name!r}")


def cast_rays(truth, occ, rx, ry, rng, n_rays):
    return _backend.cast_rays(truth, occ, rx, ry, rng, n_rays)


def thin(occ, state, wf, seeds, maxwf, table):
    return _backend.thin(occ, state, wf, seeds, maxwf, table)


def astar(passable, start, goal, use_heuristic=True):
    return _backend.astar(passable, start, goal, use_heuristic)


def dijkstra(passable, start):
    return _backend.dijkstra(passable, start)
