# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; must agree exactly with ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport floor, fabs, cos, sin, sqrt, INFINITY, M_PI
from libc.stdlib cimport malloc, realloc, free

cnp.import_array()

cdef enum:
    UNK = 0
    FREE = 1
    OCC = 2
    OUT = 3

cdef int WF_INF = 2147483647
cdef double SQRT2 = sqrt(2.0)


cdef inline bint _visit(const signed char[:] t, signed char[:] o, Py_ssize_t wp,
                        Py_ssize_t cx, Py_ssize_t cy, double px, double py, double r2,
                        list changed):
    cdef Py_ssize_t i = cy * wp + cx
    cdef signed char tv = t[i]
    cdef double ddx, ddy
    cdef bint inside
    if tv == OUT:
        return True
    ddx = cx + 0.5 - px
    ddy = cy + 0.5 - py
    inside = ddx * ddx + ddy * ddy <= r2
    if tv == OCC:
        if inside and o[i] == UNK:
            o[i] = OCC
            changed.append(i)
        return True
    if inside and o[i] == UNK:
        o[i] = FREE
        changed.append(i)
    return False


def cast_rays(truth, occ, double rx, double ry, double rng, int n_rays):
    cdef Py_ssize_t hp = occ.shape[0], wp = occ.shape[1]
    cdef const signed char[:] t = truth.reshape(-1)
    cdef signed char[:] o = occ.reshape(-1)
    cdef double px = rx + 1.0, py = ry + 1.0
    cdef double r2 = rng * rng + 1e-9
    cdef list changed = []
    cdef Py_ssize_t cx0 = <Py_ssize_t>floor(px), cy0 = <Py_ssize_t>floor(py)
    cdef Py_ssize_t cx, cy
    cdef int k, sx, sy
    cdef double theta, dx, dy, tmx, tmy, tdx, tdy, tnext
    cdef bint b1, b2
    if _visit(t, o, wp, cx0, cy0, px, py, r2, changed):
        return sorted(changed)
    for k in range(n_rays):
        theta = 2.0 * M_PI * k / n_rays
        dx = cos(theta)
        dy = sin(theta)
        if fabs(dx) < 1e-12:
            dx = 0.0
        if fabs(dy) < 1e-12:
            dy = 0.0
        cx = cx0
        cy = cy0
        if dx > 0:
            sx = 1; tmx = (cx + 1 - px) / dx; tdx = 1.0 / dx
        elif dx < 0:
            sx = -1; tmx = (px - cx) / -dx; tdx = -1.0 / dx
        else:
            sx = 0; tmx = INFINITY; tdx = INFINITY
        if dy > 0:
            sy = 1; tmy = (cy + 1 - py) / dy; tdy = 1.0 / dy
        elif dy < 0:
            sy = -1; tmy = (py - cy) / -dy; tdy = -1.0 / dy
        else:
            sy = 0; tmy = INFINITY; tdy = INFINITY
        while True:
            tnext = tmx if tmx < tmy else tmy
            if tnext > rng:
                break
            if fabs(tmx - tmy) < 1e-9:
                b1 = _visit(t, o, wp, cx + sx, cy, px, py, r2, changed)
                b2 = _visit(t, o, wp, cx, cy + sy, px, py, r2, changed)
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
            if _visit(t, o, wp, cx, cy, px, py, r2, changed):
                break
    return sorted(changed)


cdef inline bint _unk(const signed char[:] o, signed char[:] st, int[:] w, Py_ssize_t n, int j):
    return o[n] == UNK or (o[n] == FREE and st[n] == UNK and w[n] < j)


def thin(occ, state, wf, seeds, int maxwf, table):
    cdef Py_ssize_t hp = occ.shape[0], wp = occ.shape[1], size = hp * wp
    cdef const signed char[:] o = occ.reshape(-1)
    cdef signed char[:] st = state.reshape(-1)
    cdef int[:] w = wf.reshape(-1)
    cdef const unsigned char[:] tab = table.reshape(-1)
    cdef Py_ssize_t[8] offs
    offs[0] = -wp; offs[1] = -wp + 1; offs[2] = 1; offs[3] = wp + 1
    offs[4] = wp; offs[5] = wp - 1; offs[6] = -1; offs[7] = -wp - 1
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] tmark_arr = np.zeros(size, dtype=np.uint8)
    cdef unsigned char[:] tmark = tmark_arr
    cdef cnp.ndarray[cnp.int32_t, ndim=1] stamp_arr = np.zeros(size, dtype=np.int32)
    cdef int[:] stamp = stamp_arr
    cdef Py_ssize_t cap = 1024, ntouched = 0, ncand, ccap = 1024
    cdef Py_ssize_t* touched = <Py_ssize_t*>malloc(cap * sizeof(Py_ssize_t))
    cdef Py_ssize_t* cands = <Py_ssize_t*>malloc(ccap * sizeof(Py_ssize_t))
    cdef Py_ssize_t s, c, n, ti, q
    cdef int j = 0, b, bits, phase_off, removed, prev_removed = 0
    cdef long long processed = 0
    cdef signed char lab
    cdef cnp.int64_t[:] sd = np.ascontiguousarray(seeds, dtype=np.int64)
    try:
        for q in range(sd.shape[0]):
            s = sd[q]
            if tmark[s]:
                continue
            tmark[s] = 1
            if ntouched == cap:
                cap *= 2
                touched = <Py_ssize_t*>realloc(touched, cap * sizeof(Py_ssize_t))
            touched[ntouched] = s
            ntouched += 1
            st[s] = FREE if o[s] == FREE else o[s]
            w[s] = WF_INF
        while True:
            phase_off = 0 if j % 2 == 0 else 256
            ncand = 0
            for ti in range(ntouched):
                s = touched[ti]
                # same order as the pure kernel: the cell itself, then n1..n8
                for b in range(9):
                    c = s if b == 0 else s + offs[b - 1]
                    if stamp[c] != j + 1:
                        stamp[c] = j + 1
                        if o[c] == FREE and w[c] >= j:
                            if ncand == ccap:
                                ccap *= 2
                                cands = <Py_ssize_t*>realloc(cands, ccap * sizeof(Py_ssize_t))
                            cands[ncand] = c
                            ncand += 1
            removed = 0
            for q in range(ncand):
                c = cands[q]
                processed += 1
                bits = 0
                for b in range(8):
                    n = c + offs[b]
                    if o[n] == FREE and w[n] >= j:
                        bits |= 1 << b
                if tab[phase_off + bits]:
                    lab = OCC
                    if (_unk(o, st, w, c + offs[0], j) or _unk(o, st, w, c + offs[2], j)
                            or _unk(o, st, w, c + offs[4], j) or _unk(o, st, w, c + offs[6], j)):
                        lab = UNK
                    elif _unk(o, st, w, c + offs[1], j) and (o[c + offs[0]] == FREE or o[c + offs[2]] == FREE):
                        lab = UNK
                    elif _unk(o, st, w, c + offs[3], j) and (o[c + offs[2]] == FREE or o[c + offs[4]] == FREE):
                        lab = UNK
                    elif _unk(o, st, w, c + offs[5], j) and (o[c + offs[4]] == FREE or o[c + offs[6]] == FREE):
                        lab = UNK
                    elif _unk(o, st, w, c + offs[7], j) and (o[c + offs[6]] == FREE or o[c + offs[0]] == FREE):
                        lab = UNK
                    removed += 1
                    if w[c] != j or st[c] != lab:
                        if not tmark[c]:
                            tmark[c] = 1
                            if ntouched == cap:
                                cap *= 2
                                touched = <Py_ssize_t*>realloc(touched, cap * sizeof(Py_ssize_t))
                            touched[ntouched] = c
                            ntouched += 1
                        w[c] = j
                        st[c] = lab
                elif w[c] == j:
                    w[c] = WF_INF
                    st[c] = FREE
                    if not tmark[c]:
                        tmark[c] = 1
                        if ntouched == cap:
                            cap *= 2
                            touched = <Py_ssize_t*>realloc(touched, cap * sizeof(Py_ssize_t))
                        touched[ntouched] = c
                        ntouched += 1
            if j % 2 == 1 and removed == 0 and prev_removed == 0 and j - 1 > maxwf:
                break
            prev_removed = removed
            j += 1
        for ti in range(ntouched):
            s = touched[ti]
            if o[s] == FREE and st[s] == UNK:
                w[s] = WF_INF
    finally:
        free(touched)
        free(cands)
    return int(processed), j + 1


# binary min-heap keyed on (k1, k2, idx), same total order as tuples in heapq
cdef struct HeapItem:
    double k1
    double k2
    Py_ssize_t idx

cdef inline bint _less(HeapItem a, HeapItem b):
    if a.k1 != b.k1:
        return a.k1 < b.k1
    if a.k2 != b.k2:
        return a.k2 < b.k2
    return a.idx < b.idx

cdef struct Heap:
    HeapItem* data
    Py_ssize_t n
    Py_ssize_t cap

cdef void _hpush(Heap* h, double k1, double k2, Py_ssize_t idx):
    cdef Py_ssize_t i, p
    cdef HeapItem item, tmp
    if h.n == h.cap:
        h.cap *= 2
        h.data = <HeapItem*>realloc(h.data, h.cap * sizeof(HeapItem))
    item.k1 = k1; item.k2 = k2; item.idx = idx
    i = h.n
    h.n += 1
    h.data[i] = item
    while i > 0:
        p = (i - 1) >> 1
        if _less(h.data[i], h.data[p]):
            tmp = h.data[i]; h.data[i] = h.data[p]; h.data[p] = tmp
            i = p
        else:
            break

cdef HeapItem _hpop(Heap* h):
    cdef HeapItem top = h.data[0], tmp
    cdef Py_ssize_t i = 0, l, r, m
    h.n -= 1
    if h.n > 0:
        h.data[0] = h.data[h.n]
        while True:
            l = 2 * i + 1
            r = l + 1
            m = i
            if l < h.n and _less(h.data[l], h.data[m]):
                m = l
            if r < h.n and _less(h.data[r], h.data[m]):
                m = r
            if m == i:
                break
            tmp = h.data[i]; h.data[i] = h.data[m]; h.data[m] = tmp
            i = m
    return top


def astar(passable, Py_ssize_t start, Py_ssize_t goal, bint use_heuristic=True):
    cdef Py_ssize_t hp = passable.shape[0], wp = passable.shape[1], size = hp * wp
    cdef const unsigned char[:] p = passable.reshape(-1)
    if not p[start] or not p[goal]:
        return None, 0
    cdef Py_ssize_t[8] offs
    offs[0] = -wp; offs[1] = -wp + 1; offs[2] = 1; offs[3] = wp + 1
    offs[4] = wp; offs[5] = wp - 1; offs[6] = -1; offs[7] = -wp - 1
    cdef cnp.ndarray[cnp.float64_t, ndim=1] g_arr = np.full(size, np.inf)
    cdef double[:] g = g_arr
    cdef cnp.ndarray[cnp.int64_t, ndim=1] par_arr = np.full(size, -1, dtype=np.int64)
    cdef cnp.int64_t[:] parent = par_arr
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] cl_arr = np.zeros(size, dtype=np.uint8)
    cdef unsigned char[:] closed = cl_arr
    cdef Py_ssize_t gx = goal % wp, gy = goal // wp, c, n
    cdef int k, expansions = 0
    cdef double gc, ng, hn, dx, dy
    cdef Heap h
    cdef HeapItem it
    h.cap = 256
    h.n = 0
    h.data = <HeapItem*>malloc(h.cap * sizeof(HeapItem))
    g[start] = 0.0
    try:
        hn = _octile(start, gx, gy, wp) if use_heuristic else 0.0
        _hpush(&h, hn, hn, start)
        while h.n > 0:
            it = _hpop(&h)
            c = it.idx
            if closed[c]:
                continue
            closed[c] = 1
            expansions += 1
            if c == goal:
                path = [c]
                while parent[c] != -1:
                    c = parent[c]
                    path.append(c)
                path.reverse()
                return path, expansions
            gc = g[c]
            for k in range(8):
                n = c + offs[k]
                if not p[n] or closed[n]:
                    continue
                if k & 1:
                    if not (p[c + offs[k - 1]] or p[c + offs[(k + 1) & 7]]):
                        continue
                    ng = gc + SQRT2
                else:
                    ng = gc + 1.0
                if ng < g[n]:
                    g[n] = ng
                    parent[n] = c
                    hn = _octile(n, gx, gy, wp) if use_heuristic else 0.0
                    _hpush(&h, ng + hn, hn, n)
        return None, expansions
    finally:
        free(h.data)


cdef inline double _octile(Py_ssize_t i, Py_ssize_t gx, Py_ssize_t gy, Py_ssize_t wp):
    cdef double dx = fabs(<double>(i % wp - gx))
    cdef double dy = fabs(<double>(i // wp - gy))
    return (dx + dy) + (SQRT2 - 2.0) * (dx if dx < dy else dy)


def dijkstra(passable, Py_ssize_t start):
    cdef Py_ssize_t hp = passable.shape[0], wp = passable.shape[1], size = hp * wp
    cdef const unsigned char[:] p = passable.reshape(-1)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] d_arr = np.full(size, np.inf)
    if not p[start]:
        return d_arr.reshape(hp, wp)
    cdef double[:] d = d_arr
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] done_arr = np.zeros(size, dtype=np.uint8)
    cdef unsigned char[:] done = done_arr
    cdef Py_ssize_t[8] offs
    offs[0] = -wp; offs[1] = -wp + 1; offs[2] = 1; offs[3] = wp + 1
    offs[4] = wp; offs[5] = wp - 1; offs[6] = -1; offs[7] = -wp - 1
    cdef Py_ssize_t c, n
    cdef int k
    cdef double dc, nd
    cdef Heap h
    cdef HeapItem it
    h.cap = 256
    h.n = 0
    h.data = <HeapItem*>malloc(h.cap * sizeof(HeapItem))
    d[start] = 0.0
    try:
        _hpush(&h, 0.0, 0.0, start)
        while h.n > 0:
            it = _hpop(&h)
            c = it.idx
            if done[c]:
                continue
            done[c] = 1
            dc = it.k1
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
                    _hpush(&h, nd, 0.0, n)
    finally:
        free(h.data)
    return d_arr.reshape(hp, wp)
