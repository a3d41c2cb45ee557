"""Pure-Python kernels.  Reference semantics for the compiled ``_kernels`` module.

Every array argument is a padded lattice (one ring of border cells) and
addresses cells by flat row-major index.  Occupancy codes: 0 unknown,
1 free, 2 occupied; ground truth additionally uses 3 for the padding ring.
"""
from __future__ import annotations

import heapq
import math

import numpy as np

WF_INF = 2**31 - 1
SQRT2 = math.sqrt(2.0)

_UNK, _FREE, _OCC, _OUT = 0, 1, 2, 3


def _offsets(wp: int) -> tuple[int, ...]:
    # n1..n8: top, then clockwise
    return (-wp, -wp + 1, 1, wp + 1, wp, wp - 1, -1, -wp - 1)


def cast_rays(truth, occ, rx: float, ry: float, rng: float, n_rays: int) -> list[int]:
    """Observe along ``n_rays`` rays from ``(rx, ry)`` (cell units, unpadded frame)."""
    hp, wp = occ.shape
    t_flat = truth.ravel().tolist()
    o_flat = occ.ravel().tolist()
    px, py = rx + 1.0, ry + 1.0
    r2 = rng * rng + 1e-9
    changed = []

    def visit(cx, cy):
        # returns True when the ray must stop at this cell
        i = cy * wp + cx
        t = t_flat[i]
        if t == _OUT:
            return True
        ddx, ddy = cx + 0.5 - px, cy + 0.5 - py
        inside = ddx * ddx + ddy * ddy <= r2
        if t == _OCC:
            if inside and o_flat[i] == _UNK:
                o_flat[i] = _OCC
                changed.append(i)
            return True
        if inside and o_flat[i] == _UNK:
            o_flat[i] = _FREE
            changed.append(i)
        return False

    cx0, cy0 = int(math.floor(px)), int(math.floor(py))
    if visit(cx0, cy0):
        return _commit(occ, o_flat, changed)
    for k in range(n_rays):
        theta = 2.0 * math.pi * k / n_rays
        dx, dy = math.cos(theta), math.sin(theta)
        if abs(dx) < 1e-12:
            dx = 0.0
        if abs(dy) < 1e-12:
            dy = 0.0
        cx, cy = cx0, cy0
        if dx > 0:
            sx, tmx, tdx = 1, (cx + 1 - px) / dx, 1.0 / dx
        elif dx < 0:
            sx, tmx, tdx = -1, (px - cx) / -dx, -1.0 / dx
        else:
            sx, tmx, tdx = 0, math.inf, math.inf
        if dy > 0:
            sy, tmy, tdy = 1, (cy + 1 - py) / dy, 1.0 / dy
        elif dy < 0:
            sy, tmy, tdy = -1, (py - cy) / -dy, -1.0 / dy
        else:
            sy, tmy, tdy = 0, math.inf, math.inf
        while True:
            tnext = tmx if tmx < tmy else tmy
            if tnext > rng:
                break
            if abs(tmx - tmy) < 1e-9:
                # lattice corner: both side cells are touched
                b1 = visit(cx + sx, cy)
                b2 = visit(cx, cy + sy)
                if b1 or b2:
                    break
                cx += sx
                cy += sy
                tmx += tdx
                tmy += tdy
            elif tmx < tmy:
                cx += sx
                tmx += tdx
            else:
                cy += sy
                tmy += tdy
            if visit(cx, cy):
                break
    return _commit(occ, o_flat, changed)


def _commit(occ, o_flat, changed):
    flat = occ.reshape(-1)
    for i in changed:
        flat[i] = o_flat[i]
    return sorted(changed)


def thin(occ, state, wf, seeds, maxwf: int, table) -> tuple[int, int]:
    """Replay the two-phase thinning history around ``seeds``; mutates ``state``/``wf``.

    A cell is present at iteration ``j`` iff its occupancy is free and
    ``wf >= j``.  Cells outside the touched set keep their recorded history,
    which stays valid as long as none of their neighbours' histories change.
    Returns ``(evaluated_cells, iterations)``.
    """
    hp, wp = occ.shape
    o = occ.ravel().tolist()
    st = state.ravel().tolist()
    w = wf.ravel().tolist()
    tab = table.ravel().tolist()
    offs = _offsets(wp)
    n1, n2, n3, n4, n5, n6, n7, n8 = offs
    diag_orth = ((n2, n1, n3), (n4, n3, n5), (n6, n5, n7), (n8, n7, n1))

    touched_mark = bytearray(hp * wp)
    touched: list[int] = []
    for s in seeds:
        s = int(s)
        if touched_mark[s]:
            continue
        touched_mark[s] = 1
        touched.append(s)
        st[s] = _FREE if o[s] == _FREE else o[s]
        w[s] = WF_INF

    stamp = np.zeros(hp * wp, dtype=np.int32).tolist()
    processed = 0
    j = 0
    prev_removed = 0
    while True:
        phase_off = 0 if j % 2 == 0 else 256
        cands = []
        for t in touched:
            for c in (t, t + n1, t + n2, t + n3, t + n4, t + n5, t + n6, t + n7, t + n8):
                if stamp[c] != j + 1:
                    stamp[c] = j + 1
                    if o[c] == _FREE and w[c] >= j:
                        cands.append(c)
        removed = 0
        for c in cands:
            processed += 1
            bits = 0
            for b in range(8):
                n = c + offs[b]
                if o[n] == _FREE and w[n] >= j:
                    bits |= 1 << b
            if tab[phase_off + bits]:
                # unknown-originated wave if a linked neighbour reads unknown
                lab = _OCC
                for n in (c + n1, c + n3, c + n5, c + n7):
                    if o[n] == _UNK or (o[n] == _FREE and st[n] == _UNK and w[n] < j):
                        lab = _UNK
                        break
                if lab == _OCC:
                    for d, a, b in diag_orth:
                        n = c + d
                        if (o[n] == _UNK or (o[n] == _FREE and st[n] == _UNK and w[n] < j)) and (
                            o[c + a] == _FREE or o[c + b] == _FREE
                        ):
                            lab = _UNK
                            break
                removed += 1
                if w[c] != j or st[c] != lab:
                    if not touched_mark[c]:
                        touched_mark[c] = 1
                        touched.append(c)
                    w[c] = j
                    st[c] = lab
            elif w[c] == j:
                w[c] = WF_INF
                st[c] = _FREE
                if not touched_mark[c]:
                    touched_mark[c] = 1
                    touched.append(c)
        if j % 2 == 1 and removed == 0 and prev_removed == 0 and j - 1 > maxwf:
            break
        prev_removed = removed
        j += 1

    for t in touched:
        if o[t] == _FREE and st[t] == _UNK:
            w[t] = WF_INF
    sflat = state.reshape(-1)
    wflat = wf.reshape(-1)
    for t in touched:
        sflat[t] = st[t]
        wflat[t] = w[t]
    return processed, j + 1


def astar(passable, start: int, goal: int, use_heuristic: bool = True):
    """8-connected shortest path over ``passable`` (uint8, padded).

    Diagonal moves need at least one of the two orthogonal cells passable.
    Returns ``(path, expansions)`` with ``path`` a list of flat indices or None.
    """
    hp, wp = passable.shape
    p = passable.ravel().tolist()
    if not p[start] or not p[goal]:
        return None, 0
    gx, gy = goal % wp, goal // wp
    offs = _offsets(wp)
    g = {start: 0.0}
    parent = {start: -1}
    closed = set()

    def h(i):
        if not use_heuristic:
            return 0.0
        dx = abs(i % wp - gx)
        dy = abs(i // wp - gy)
        return (dx + dy) + (SQRT2 - 2.0) * (dx if dx < dy else dy)

    h0 = h(start)
    heap = [(h0, h0, start)]
    expansions = 0
    while heap:
        f, hh, c = heapq.heappop(heap)
        if c in closed:
            continue
        closed.add(c)
        expansions += 1
        if c == goal:
            path = [c]
            while parent[path[-1]] != -1:
                path.append(parent[path[-1]])
            path.reverse()
            return path, expansions
        gc = g[c]
        for k in range(8):
            n = c + offs[k]
            if not p[n] or n in closed:
                continue
            if k & 1:
                if not (p[c + offs[k - 1]] or p[c + offs[(k + 1) & 7]]):
                    continue
                ng = gc + SQRT2
            else:
                ng = gc + 1.0
            if ng < g.get(n, math.inf):
                g[n] = ng
                parent[n] = c
                hn = h(n)
                heapq.heappush(heap, (ng + hn, hn, n))
    return None, expansions


def dijkstra(passable, start: int) -> np.ndarray:
    """Octile-cost distances from ``start`` to every passable cell (inf elsewhere)."""
    hp, wp = passable.shape
    p = passable.ravel().tolist()
    dist = np.full(hp * wp, np.inf)
    if not p[start]:
        return dist.reshape(hp, wp)
    offs = _offsets(wp)
    d = [math.inf] * (hp * wp)
    d[start] = 0.0
    heap = [(0.0, start)]
    done = bytearray(hp * wp)
    while heap:
        dc, c = heapq.heappop(heap)
        if done[c]:
            continue
        done[c] = 1
        for k in range(8):
            n = c + offs[k]
            if not p[n] or done[n]:
                continue
            if k & 1:
                if not (p[c + offs[k - 1]] or p[c + offs[(k + 1) & 7]]):
                    continue
                nd = dc + SQRT2
            else:
                nd = dc + 1.0
            if nd < d[n]:
                d[n] = nd
                heapq.heappush(heap, (nd, n))
    dist[:] = d
    return dist.reshape(hp, wp)
