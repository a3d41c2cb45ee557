"""Grid path planning, boundary clustering and open-tour 2-opt."""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import ndimage

from . import kernels
from .skeleton import linked_unknown_mask
from .world import FREE, UNKNOWN, Cell, OccupancyGrid, PlanningContractError

SQRT2 = math.sqrt(2.0)


class UnreachableError(PlanningContractError):
    pass


@dataclass
class PlanResult:
    path: list[Cell]
    cost: float  # in cells (octile)
    expansions: int
    tube: bool = False


def passable(grid: OccupancyGrid) -> np.ndarray:
    return (grid.padded == FREE).astype(np.uint8)


def octile(a: Cell, b: Cell) -> float:
    dx, dy = abs(a[0] - b[0]), abs(a[1] - b[1])
    return max(dx, dy) + (SQRT2 - 1.0) * min(dx, dy)


def path_cost(path: list[Cell]) -> float:
    return sum(SQRT2 if a[0] != b[0] and a[1] != b[1] else 1.0 for a, b in zip(path, path[1:]))


def distance_field(grid: OccupancyGrid, start: Cell, mask: np.ndarray | None = None) -> np.ndarray:
    """Octile shortest-path distance (cells) from ``start`` over free cells, unpadded."""
    p = passable(grid) if mask is None else mask
    return kernels.dijkstra(p, grid.flat(start))[1:-1, 1:-1]


def _search(grid: OccupancyGrid, p: np.ndarray, start: Cell, goal: Cell) -> tuple[list[Cell] | None, int]:
    idx, exp = kernels.astar(p, grid.flat(start), grid.flat(goal))
    if idx is None:
        return None, exp
    return [grid.unflat(i) for i in idx], exp


def a_star(grid: OccupancyGrid, start: Cell, goal: Cell, graph=None, tube_radius: int = 3) -> PlanResult:
    """Shortest 8-connected path over observed-free cells.

    With ``graph`` the search is first confined to a tube around the STG
    route between the nodes nearest the two endpoints; if that fails the
    unrestricted search runs.
    """
    start, goal = tuple(start), tuple(goal)
    if not grid.is_free(start) or not grid.is_free(goal):
        raise PlanningContractError(f"endpoints must be observed free: {start} -> {goal}")
    if start == goal:
        return PlanResult([start], 0.0, 1)
    p = passable(grid)
    spent = 0
    if graph is not None and graph.edges:
        tube = stg_tube(grid, graph, start, goal, tube_radius)
        if tube is not None:
            path, exp = _search(grid, p & tube, start, goal)
            spent = exp
            if path is not None:
                return PlanResult(path, path_cost(path), exp, tube=True)
    path, exp = _search(grid, p, start, goal)
    if path is None:
        raise UnreachableError(f"no path from {start} to {goal}")
    return PlanResult(path, path_cost(path), exp + spent)


def _route_cells(graph) -> tuple[dict[Cell, list[tuple[Cell, float]]], dict[Cell, int]]:
    """Cell-level adjacency along all edge polylines, plus a clearance per cell."""
    from .stg import edge_path

    cached = graph.route_cache
    if cached is not None and cached[0] == graph.edges_version:
        return cached[1], cached[2]
    adj: dict[Cell, list[tuple[Cell, float]]] = {}
    clear: dict[Cell, int] = {}
    for e in graph.edges:
        cells = edge_path(graph, e)
        for a, b in zip(cells, cells[1:]):
            w = SQRT2 if a[0] != b[0] and a[1] != b[1] else 1.0
            adj.setdefault(a, []).append((b, w))
            adj.setdefault(b, []).append((a, w))
    for c in adj:
        nid = graph.by_cell.get(c)
        clear[c] = graph.nodes[nid].wave_front if nid is not None else 0
    graph.route_cache = (graph.edges_version, adj, clear, list(adj), np.asarray(list(adj)))
    return adj, clear


@lru_cache(maxsize=64)
def _disc(r: int) -> np.ndarray:
    yy, xx = np.mgrid[-r:r + 1, -r:r + 1]
    return (xx * xx + yy * yy <= r * r).astype(np.uint8)


def stg_tube(grid: OccupancyGrid, graph, start: Cell, goal: Cell, tube_radius: int) -> np.ndarray | None:
    """Padded uint8 mask around the STG route from near ``start`` to near ``goal``."""
    adj, clear = _route_cells(graph)
    if not adj:
        return None
    cells, arr = graph.route_cache[3], graph.route_cache[4]

    def nearest(c):
        d2 = (arr[:, 0] - c[0]) ** 2 + (arr[:, 1] - c[1]) ** 2
        i = int(np.argmin(d2))
        return cells[i], math.sqrt(float(d2[i]))

    s, ds = nearest(start)
    g, dg = nearest(goal)
    if ds > tube_radius or dg > tube_radius:
        return None
    # uniform-cost search along the edge polylines
    dist = {s: 0.0}
    prev: dict[Cell, Cell] = {}
    heap = [(0.0, s)]
    while heap:
        d, c = heapq.heappop(heap)
        if c == g:
            break
        if d > dist[c]:
            continue
        for n, w in adj[c]:
            nd = d + w
            if nd < dist.get(n, math.inf):
                dist[n] = nd
                prev[n] = c
                heapq.heappush(heap, (nd, n))
    if g not in dist:
        return None
    route = [g]
    while route[-1] != s:
        route.append(prev[route[-1]])
    mask = np.zeros((grid.height + 2, grid.width + 2), np.uint8)
    inner = mask[1:-1, 1:-1]
    discs = {(start, tube_radius), (goal, tube_radius)}
    discs.update((c, max(tube_radius, clear.get(c, 0) + 1)) for c in route)
    for (x, y), r in discs:
        x0, x1 = max(0, x - r), min(grid.width, x + r + 1)
        y0, y1 = max(0, y - r), min(grid.height, y + r + 1)
        inner[y0:y1, x0:x1] |= _disc(r)[y0 - y + r:y1 - y + r, x0 - x + r:x1 - x + r]
    return mask


def boundary_mask(grid: OccupancyGrid) -> np.ndarray:
    """Observed-free cells next to an unknown cell (diagonals only through a free side cell)."""
    pad = grid.padded
    free = pad == FREE
    return linked_unknown_mask(pad == UNKNOWN, free) & free[1:-1, 1:-1]


def boundary_clusters(mask: np.ndarray) -> list[tuple[Cell, list[Cell]]]:
    """8-connected clusters as (representative, members); the representative is the member nearest the centroid."""
    labels, n = ndimage.label(mask, structure=np.ones((3, 3), int))
    out = []
    for k in range(1, n + 1):
        ys, xs = np.nonzero(labels == k)
        cx, cy = xs.mean(), ys.mean()
        d2 = (xs - cx) ** 2 + (ys - cy) ** 2
        best = d2.min()
        rep = min((int(x), int(y)) for x, y, d in zip(xs, ys, d2) if d <= best + 1e-12)
        out.append((rep, [(int(x), int(y)) for x, y in zip(xs, ys)]))
    out.sort(key=lambda t: t[0])
    return out


def tour_length(points, order, origin=None) -> float:
    pts = [points[i] for i in order]
    if origin is not None:
        pts = [origin, *pts]
    return sum(math.dist(a, b) for a, b in zip(pts, pts[1:]))


def two_opt(points, origin) -> list[int]:
    """Open tour from ``origin`` through every point: nearest-neighbour start, then 2-opt to a local optimum."""
    n = len(points)
    if n <= 1:
        return list(range(n))
    left = set(range(n))
    order = []
    cur = origin
    while left:
        nxt = min(left, key=lambda i: (math.dist(cur, points[i]), i))
        order.append(nxt)
        left.remove(nxt)
        cur = points[nxt]
    pts = [origin, *points]
    route = [0, *(i + 1 for i in order)]

    def d(a, b):
        return math.dist(pts[route[a]], pts[route[b]])

    improved = True
    while improved:
        improved = False
        for i in range(len(route) - 1):
            for j in range(i + 2, len(route)):
                # reverse route[i+1..j]; the open end has no closing edge
                before = d(i, i + 1) + (d(j, j + 1) if j + 1 < len(route) else 0.0)
                after = d(i, j) + (d(i + 1, j + 1) if j + 1 < len(route) else 0.0)
                if after < before - 1e-12:
                    route[i + 1:j + 1] = reversed(route[i + 1:j + 1])
                    improved = True
    return [r - 1 for r in route[1:]]


def has_improving_swap(points, origin, order) -> bool:
    pts = [origin, *(points[i] for i in order)]
    m = len(pts)
    for i in range(m - 1):
        for j in range(i + 2, m):
            before = math.dist(pts[i], pts[i + 1]) + (math.dist(pts[j], pts[j + 1]) if j + 1 < m else 0.0)
            after = math.dist(pts[i], pts[j]) + (math.dist(pts[i + 1], pts[j + 1]) if j + 1 < m else 0.0)
            if after < before - 1e-9:
                return True
    return False
