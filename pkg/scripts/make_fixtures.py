"""Regenerate the bundled map fixtures under src/stgexplore/maps/.

Deterministic: re-running produces byte-identical files.

    python scripts/make_fixtures.py
"""
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parent.parent / "src" / "stgexplore" / "maps"

WALL, FREE = 2, 1


def to_text(cells, start, comment):
    lines = [f"% {comment}"]
    for y, row in enumerate(cells):
        chars = ["#" if v == WALL else "." for v in row]
        if start[1] == y:
            chars[start[0]] = "S"
        lines.append("".join(chars))
    return "\n".join(lines) + "\n"


def room_small():
    g = np.full((12, 16), WALL, np.int8)
    g[1:-1, 1:-1] = FREE
    return g, (3, 5), "single open room"


def corridor():
    g = np.full((3, 40), WALL, np.int8)
    g[1, 1:-1] = FREE
    return g, (1, 1), "straight one-cell corridor"


def y_maze():
    g = np.full((40, 41), WALL, np.int8)
    g[20:38, 18:23] = FREE  # stem
    for k in range(19):  # two diagonal arms, 5 cells wide
        y = 20 - k
        g[y - 2:y + 3, 18 - k:23 - k] = FREE
        g[y - 2:y + 3, 18 + k:23 + k] = FREE
    g[0, :] = g[-1, :] = WALL
    g[:, 0] = g[:, -1] = WALL
    return g, (20, 36), "Y-shaped junction with two arms"


def ring():
    g = np.full((24, 30), WALL, np.int8)
    g[1:-1, 1:-1] = FREE
    g[6:-6, 6:-6] = WALL
    return g, (3, 12), "loop corridor around a central block"


def perfect_maze(rng, m, n):
    """Spanning tree over an m x n cell lattice (iterative DFS); returns open passages."""
    seen = np.zeros((m, n), bool)
    stack = [(0, 0)]
    seen[0, 0] = True
    passages = set()
    while stack:
        r, c = stack[-1]
        nbrs = [(r + dr, c + dc) for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1))
                if 0 <= r + dr < m and 0 <= c + dc < n and not seen[r + dr, c + dc]]
        if not nbrs:
            stack.pop()
            continue
        nr, nc = nbrs[rng.integers(len(nbrs))]
        seen[nr, nc] = True
        passages.add(((r, c), (nr, nc)))
        stack.append((nr, nc))
    return passages


def maze_small():
    rng = np.random.default_rng(7)
    m, c, t = 4, 8, 1
    size = 40
    g = np.full((size, size), WALL, np.int8)
    pitch = c + t

    def origin(r, k):
        return t + r * pitch, t + k * pitch

    for r in range(m):
        for k in range(m):
            y, x = origin(r, k)
            g[y:y + c, x:x + c] = FREE
    for (r1, k1), (r2, k2) in sorted(perfect_maze(rng, m, m)):
        y1, x1 = origin(r1, k1)
        y2, x2 = origin(r2, k2)
        g[min(y1, y2):max(y1, y2) + c, min(x1, x2):max(x1, x2) + c] = FREE
    return g, (2, 2), "4x4 perfect maze, 8-cell corridors"


def maze_medium():
    """Office-like floor: a spine corridor, three cross corridors and doors into rooms."""
    rng = np.random.default_rng(11)
    size = 120
    g = np.full((size, size), WALL, np.int8)
    half = 2
    cross = (20, 60, 100)
    for y in cross:
        g[y - half:y + half + 1, 4:size - 4] = FREE
    g[cross[0]:cross[-1] + 1, 58:63] = FREE
    # room bands: (top, bottom, door side)
    bands = [
        (2, 16, "down"),
        (24, 39, "up"), (41, 56, "down"),
        (64, 79, "up"), (81, 96, "down"),
        (104, 117, "up"),
    ]
    for top, bottom, side in bands:
        for x0, x1 in ((2, 57), (64, 117)):
            x = x0
            while x < x1:
                w = int(rng.integers(9, 17))
                xe = min(x + w, x1)
                if x1 - xe < 8:
                    xe = x1
                g[top:bottom + 1, x:xe] = FREE
                door = int(rng.integers(x + 1, max(x + 2, xe - 4)))
                if side == "down":
                    g[bottom + 1, door:door + 3] = FREE
                else:
                    g[top - 1, door:door + 3] = FREE
                # occasional interior partition with a gap
                if xe - x >= 13 and rng.random() < 0.5:
                    px = x + (xe - x) // 2
                    g[top:bottom + 1, px] = WALL
                    gap = int(rng.integers(top + 2, bottom - 3))
                    g[gap:gap + 3, px] = FREE
                x = xe + 1
    g[0, :] = g[-1, :] = WALL
    g[:, 0] = g[:, -1] = WALL
    return g, (60, 60), "office-like floor with rooms off a corridor network"


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for fn in (room_small, corridor, y_maze, ring, maze_small, maze_medium):
        cells, start, comment = fn()
        assert cells[start[1], start[0]] == FREE, fn.__name__
        (OUT / f"{fn.__name__}.txt").write_text(to_text(cells, start, comment), encoding="ascii")
        print(f"{fn.__name__}: {cells.shape[1]}x{cells.shape[0]}, {int((cells == FREE).sum())} free")


if __name__ == "__main__":
    main()
