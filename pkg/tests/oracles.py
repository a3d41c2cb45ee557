"""Independent reference implementations used only by the tests."""
import heapq
import itertools
import math

import numpy as np

INF = np.iinfo(np.int32).max


def zs_conditions(window: np.ndarray, phase: int) -> bool:
    """Literal thinning conditions on a 3x3 window (centre present)."""
    p = {
        2: window[0, 1], 3: window[0, 2], 4: window[1, 2], 5: window[2, 2],
        6: window[2, 1], 7: window[2, 0], 8: window[1, 0], 9: window[0, 0],
    }
    seq = [p[k] for k in range(2, 10)] + [p[2]]
    a = sum(1 for u, v in zip(seq, seq[1:]) if u == 0 and v == 1)
    b = sum(p[k] for k in range(2, 10))
    if not (2 <= b <= 6) or a != 1:
        return False
    if phase == 1:
        return p[2] * p[4] * p[6] == 0 and p[4] * p[6] * p[8] == 0
    return p[2] * p[4] * p[8] == 0 and p[2] * p[6] * p[8] == 0


def zhang_suen(free: np.ndarray):
    """Textbook two-subiteration thinning; returns (skeleton mask, removal iteration)."""
    h, w = free.shape
    img = np.zeros((h + 2, w + 2), np.uint8)
    img[1:-1, 1:-1] = free
    wave = np.full((h, w), INF, np.int64)
    it = 0
    while True:
        removed_round = 0
        for phase in (1, 2):
            kill = []
            for y in range(1, h + 1):
                for x in range(1, w + 1):
                    if img[y, x] and zs_conditions(img[y - 1:y + 2, x - 1:x + 2], phase):
                        kill.append((y, x))
            for y, x in kill:
                img[y, x] = 0
                wave[y - 1, x - 1] = it
            removed_round += len(kill)
            it += 1
        if not removed_round:
            break
    return img[1:-1, 1:-1].astype(bool), wave


def uniform_cost(free: np.ndarray, start, goal) -> float:
    """Dijkstra over 8-neighbours; diagonal allowed when one orthogonal side cell is free."""
    h, w = free.shape
    dist = {start: 0.0}
    heap = [(0.0, start)]
    while heap:
        d, (x, y) = heapq.heappop(heap)
        if (x, y) == goal:
            return d
        if d > dist[(x, y)]:
            continue
        for dx, dy in itertools.product((-1, 0, 1), repeat=2):
            if not (dx or dy):
                continue
            nx, ny = x + dx, y + dy
            if not (0 <= nx < w and 0 <= ny < h) or not free[ny, nx]:
                continue
            if dx and dy and not (free[y, nx] or free[ny, x]):
                continue
            nd = d + (math.sqrt(2) if dx and dy else 1.0)
            if nd < dist.get((nx, ny), math.inf) - 1e-12:
                dist[(nx, ny)] = nd
                heapq.heappush(heap, (nd, (nx, ny)))
    return math.inf


def brute_force_tour(points, origin):
    best, best_order = math.inf, None
    for perm in itertools.permutations(range(len(points))):
        pts = [origin, *(points[i] for i in perm)]
        length = sum(math.dist(a, b) for a, b in zip(pts, pts[1:]))
        if length < best - 1e-12:
            best, best_order = length, list(perm)
    return best, best_order
