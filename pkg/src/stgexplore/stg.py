"""Skeletal topological graph: tree-grown nodes over the skeleton, compressed into edges."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np

from .skeleton import WF_INF, SkeletonField, skeleton_unknown_adjacent
from .world import NEIGHBOURS_8, OCCUPIED, Cell

DEFAULT_STEP = 5
DEFAULT_THRES = 3
_SQRT2 = math.sqrt(2.0)


class NotReadyError(RuntimeError):
    """The skeleton has no free cell to anchor the home node yet."""


class GraphContractError(KeyError):
    pass


class NodeType(Enum):
    TERMINATION = "T"
    CONNECTION = "C"
    BRANCH = "B"
    INFLOW = "I"


JUNCTIONS = (NodeType.BRANCH, NodeType.INFLOW)


@dataclass
class TopoNode:
    id: int
    cell: Cell
    type: NodeType = NodeType.TERMINATION
    parents: list[int] = field(default_factory=list)
    children: list[int] = field(default_factory=list)
    wave_front: int = 0
    created: int = 0
    stale: bool = False


@dataclass
class TopoEdge:
    a: int
    b: int
    cells: list[Cell]  # omitted Connection cells, ordered from a to b
    length: float


class BranchId(NamedTuple):
    junction: int
    child: int


@dataclass
class TopoGraph:
    resolution: float = 1.0
    nodes: dict[int, TopoNode] = field(default_factory=dict)
    edges: list[TopoEdge] = field(default_factory=list)
    home: int = -1
    frontier: list[int] = field(default_factory=list)
    inflow_candidates: list[tuple[int, int]] = field(default_factory=list)
    by_cell: dict[Cell, int] = field(default_factory=dict)
    pruned_cells: set[Cell] = field(default_factory=set)
    ever_skeleton: np.ndarray | None = None
    cycle: int = 0
    next_id: int = 0
    # statistics of the last update
    last_new: list[int] = field(default_factory=list)
    last_inflows: int = 0
    last_fake_inflows: int = 0
    last_pruned: int = 0
    edges_version: int = 0
    route_cache: tuple | None = None  # planner-side cache keyed by edges_version

    def node_at(self, cell: Cell) -> TopoNode | None:
        nid = self.by_cell.get(cell)
        return None if nid is None else self.nodes[nid]

    def add_node(self, cell: Cell, wave_front: int, parent: int | None = None) -> TopoNode:
        node = TopoNode(self.next_id, cell, wave_front=wave_front, created=self.cycle)
        self.next_id += 1
        if parent is not None:
            node.parents.append(parent)
            self.nodes[parent].children.append(node.id)
        self.nodes[node.id] = node
        self.by_cell[cell] = node.id
        return node

    def set_type(self, nid: int) -> None:
        node = self.nodes[nid]
        if nid == self.home:
            # root: no parent, treated as a junction so it always anchors edges
            node.type = NodeType.TERMINATION if not node.children else NodeType.BRANCH
        elif len(node.parents) >= 2:
            node.type = NodeType.INFLOW
        elif not node.children:
            node.type = NodeType.TERMINATION
        elif len(node.children) == 1:
            node.type = NodeType.CONNECTION
        else:
            node.type = NodeType.BRANCH

    def primary_parent(self, nid: int) -> int | None:
        p = self.nodes[nid].parents
        return p[0] if p else None

    def ancestors(self, nid: int, step: int) -> list[int]:
        """``nid`` and up to ``step`` primary ancestors."""
        out = [nid]
        cur = nid
        for _ in range(step):
            cur = self.primary_parent(cur)
            if cur is None:
                break
            out.append(cur)
        return out

    def frontier_nodes(self) -> list[TopoNode]:
        return [self.nodes[n] for n in self.frontier if n in self.nodes]

    def count_types(self) -> dict[NodeType, int]:
        out = {t: 0 for t in NodeType}
        for n in self.nodes.values():
            out[n.type] += 1
        return out


def node_wave_front(sk: SkeletonField, cell: Cell) -> int:
    """Iteration at which the thinning waves met at ``cell``: 1 + latest removal among its neighbours."""
    best = -1
    x, y = cell
    for dx, dy in NEIGHBOURS_8:
        v = int(sk.wave[y + dy + 1, x + dx + 1])
        if v != WF_INF and sk.state[y + dy + 1, x + dx + 1] == OCCUPIED and v > best:
            best = v
    return best + 1


def init(sk: SkeletonField, start: Cell, resolution: float = 1.0) -> TopoGraph:
    mask = sk.skeleton_mask
    ys, xs = np.nonzero(mask)
    if xs.size == 0:
        raise NotReadyError("skeleton is empty")
    d2 = (xs - start[0]) ** 2 + (ys - start[1]) ** 2
    best = d2.min()
    cands = sorted((int(x), int(y)) for x, y, d in zip(xs, ys, d2) if d == best)
    graph = TopoGraph(resolution=resolution)
    graph.ever_skeleton = mask.copy()
    home = graph.add_node(cands[0], node_wave_front(sk, cands[0]))
    graph.home = home.id
    graph.frontier.append(home.id)
    return graph


def expand(graph: TopoGraph, sk: SkeletonField, unknown_adjacent: np.ndarray | None = None) -> TopoGraph:
    """Depth-first growth from the frontier queue over skeleton cells without nodes."""
    if unknown_adjacent is None:
        unknown_adjacent = skeleton_unknown_adjacent(sk)
    mask = sk.skeleton_mask
    queue, graph.frontier = graph.frontier, []
    graph.inflow_candidates = []
    in_frontier: set[int] = set()
    graph.last_new = []
    w, h = sk.width, sk.height
    for root in queue:
        if root not in graph.nodes:
            continue
        stack = [root]
        while stack:
            nid = stack.pop()
            node = graph.nodes[nid]
            x, y = node.cell
            if unknown_adjacent[y, x] and nid not in in_frontier:
                in_frontier.add(nid)
                graph.frontier.append(nid)
            children = []
            fresh = []
            for dx, dy in NEIGHBOURS_8:
                c = (x + dx, y + dy)
                if not (0 <= c[0] < w and 0 <= c[1] < h) or not mask[c[1], c[0]]:
                    continue
                other = graph.by_cell.get(c)
                if other is not None:
                    graph.inflow_candidates.append((other, nid))
                elif c not in graph.pruned_cells:
                    fresh.append((dx, dy))
            orth = {d for d in fresh if not (d[0] and d[1])}
            for dx, dy in fresh:
                # a diagonal cell next to a new orthogonal child is left for that child
                if dx and dy and ((dx, 0) in orth or (0, dy) in orth):
                    continue
                c = (x + dx, y + dy)
                child = graph.add_node(c, node_wave_front(sk, c), parent=nid)
                graph.last_new.append(child.id)
                children.append(child.id)
            graph.set_type(nid)
            for cid in children:
                graph.set_type(cid)
            stack.extend(reversed(children))
    return graph


def resolve_inflows(graph: TopoGraph, step: int = DEFAULT_STEP) -> TopoGraph:
    """Turn candidate pairs into inflow links unless they share an ancestor within ``step`` hops."""
    graph.last_inflows = graph.last_fake_inflows = 0
    for a, b in graph.inflow_candidates:
        if a == b or a not in graph.nodes or b not in graph.nodes:
            continue
        na, nb = graph.nodes[a], graph.nodes[b]
        if a in nb.parents or b in na.parents:
            continue
        if set(graph.ancestors(a, step)) & set(graph.ancestors(b, step)):
            graph.last_fake_inflows += 1
            continue
        inflow, other = (na, nb) if a < b else (nb, na)
        if inflow.id == graph.home:
            inflow, other = other, inflow
        inflow.parents.append(other.id)
        other.children.append(inflow.id)
        graph.set_type(inflow.id)
        graph.set_type(other.id)
        graph.last_inflows += 1
    graph.inflow_candidates = []
    return graph


def prune(graph: TopoGraph, sk: SkeletonField, thres: int = DEFAULT_THRES) -> TopoGraph:
    """Remove spurs ending in a new, non-frontier Termination whose wavefront is below ``thres``."""
    graph.last_pruned = 0
    frontier = set(graph.frontier)
    for tid in list(graph.last_new):
        node = graph.nodes.get(tid)
        if node is None or node.type != NodeType.TERMINATION or tid in frontier:
            continue
        if node.wave_front >= thres or tid == graph.home:
            continue
        chain = []
        cur = tid
        junction = None
        while True:
            n = graph.nodes[cur]
            if cur == graph.home or n.type in JUNCTIONS:
                junction = cur
                break
            if cur in frontier or len(n.parents) != 1:
                break
            chain.append(cur)
            cur = n.parents[0]
        if junction is None or not chain:
            continue
        if junction == graph.home and len(graph.nodes[junction].children) < 2:
            continue
        for cid in chain:
            n = graph.nodes.pop(cid)
            del graph.by_cell[n.cell]
            graph.pruned_cells.add(n.cell)
        jn = graph.nodes[junction]
        jn.children.remove(chain[-1])
        graph.set_type(junction)
        graph.last_pruned += len(chain)
    return graph


def path_length(cells: list[Cell], resolution: float) -> float:
    diag = sum(1 for a, b in zip(cells, cells[1:]) if a[0] != b[0] and a[1] != b[1])
    return resolution * ((len(cells) - 1 - diag) + diag * _SQRT2)


def rebuild_edges(graph: TopoGraph) -> TopoGraph:
    """Connect consecutive non-Connection nodes, recording the skipped Connection cells."""
    edges = []
    for nid in sorted(graph.nodes):
        node = graph.nodes[nid]
        if node.type == NodeType.CONNECTION:
            continue
        for p in node.parents:
            seq = []
            cur = p
            while graph.nodes[cur].type == NodeType.CONNECTION:
                seq.append(graph.nodes[cur].cell)
                cur = graph.nodes[cur].parents[0]
            seq.reverse()
            cells = [graph.nodes[cur].cell, *seq, node.cell]
            edges.append(TopoEdge(cur, nid, seq, path_length(cells, graph.resolution)))
    graph.edges = edges
    graph.edges_version += 1
    return graph


def update(graph: TopoGraph, sk: SkeletonField, step: int = DEFAULT_STEP, thres: int = DEFAULT_THRES) -> TopoGraph:
    """One full cycle: mark stale nodes, expand, resolve inflows, prune, rebuild edges."""
    mask = sk.skeleton_mask
    if graph.ever_skeleton is None:
        graph.ever_skeleton = mask.copy()
    else:
        graph.ever_skeleton |= mask
    for node in graph.nodes.values():
        node.stale = not mask[node.cell[1], node.cell[0]]
    expand(graph, sk)
    resolve_inflows(graph, step)
    prune(graph, sk, thres)
    if graph.last_new or graph.last_inflows or graph.last_pruned or not graph.edges_version:
        rebuild_edges(graph)
    graph.cycle += 1
    return graph


def branch_of(graph: TopoGraph, nid: int) -> BranchId:
    """Nearest junction ancestor of ``nid`` paired with the child it descends through."""
    if nid not in graph.nodes:
        raise GraphContractError(f"node {nid} is not in the graph")
    if nid == graph.home:
        return BranchId(graph.home, graph.home)
    cur = nid
    while True:
        p = graph.primary_parent(cur)
        if p is None:
            return BranchId(cur, cur)
        if p == graph.home or graph.nodes[p].type in JUNCTIONS:
            return BranchId(p, cur)
        cur = p


def edge_path(graph: TopoGraph, edge: TopoEdge) -> list[Cell]:
    return [graph.nodes[edge.a].cell, *edge.cells, graph.nodes[edge.b].cell]


def check_invariants(graph: TopoGraph) -> list[str]:
    """Structural checks: type consistency, forest, edge reconstruction, compression."""
    errors = []
    nodes = graph.nodes
    for nid, n in nodes.items():
        np_, nc = len(n.parents), len(n.children)
        t = n.type
        if nid == graph.home:
            ok = np_ == 0 and t is (NodeType.BRANCH if nc else NodeType.TERMINATION)
        elif t is NodeType.TERMINATION:
            ok = np_ == 1 and nc == 0
        elif t is NodeType.CONNECTION:
            ok = np_ == 1 and nc == 1
        elif t is NodeType.BRANCH:
            ok = np_ == 1 and nc >= 2
        else:
            ok = np_ >= 2
        if not ok:
            errors.append(f"type: node {nid} is {t.name} with {np_} parents, {nc} children")
        for c in n.children:
            if c not in nodes or nid not in nodes[c].parents:
                errors.append(f"link: child {c} of {nid} does not point back")
        for p in n.parents:
            if p not in nodes or nid not in nodes[p].children:
                errors.append(f"link: parent {p} of {nid} does not point back")
    # forest: primary parents lead to home without cycles
    rooted = {graph.home}
    for nid in graph.nodes:
        walk = []
        cur = nid
        while cur not in rooted:
            if cur in walk:
                errors.append(f"forest: cycle through {nid}")
                break
            walk.append(cur)
            p = graph.primary_parent(cur)
            if p is None or p not in graph.nodes:
                errors.append(f"forest: node {nid} is not rooted at home")
                break
            cur = p
        else:
            rooted.update(walk)
    ever = graph.ever_skeleton
    for e in graph.edges:
        if nodes[e.a].type is NodeType.CONNECTION or nodes[e.b].type is NodeType.CONNECTION:
            errors.append(f"compression: edge {e.a}-{e.b} has a Connection endpoint")
        cells = edge_path(graph, e)
        length = 0.0
        for a, b in zip(cells, cells[1:]):
            dx, dy = abs(a[0] - b[0]), abs(a[1] - b[1])
            if max(dx, dy) != 1:
                errors.append(f"edge {e.a}-{e.b}: cells {a} and {b} not 8-adjacent")
            length += _SQRT2 if dx and dy else 1.0
        if ever is not None and not all(ever[y, x] for x, y in cells):
            errors.append(f"edge {e.a}-{e.b}: leaves the skeleton")
        if abs(length * graph.resolution - e.length) > 1e-9:
            errors.append(f"edge {e.a}-{e.b}: length mismatch")
    return errors


def dump(graph: TopoGraph) -> str:
    """``node id type cx cy wf`` lines followed by ``edge a b len k c1x c1y ...`` lines."""
    lines = []
    for nid in sorted(graph.nodes):
        n = graph.nodes[nid]
        lines.append(f"node {nid} {n.type.value} {n.cell[0]} {n.cell[1]} {n.wave_front}")
    for e in graph.edges:
        coords = " ".join(f"{x} {y}" for x, y in e.cells)
        lines.append(f"edge {e.a} {e.b} {e.length:.6f} {len(e.cells)}" + (f" {coords}" if coords else ""))
    return "\n".join(lines) + ("\n" if lines else "")


def parse_dump(text: str) -> tuple[dict[int, tuple[str, Cell, int]], list[tuple[int, int, float, list[Cell]]]]:
    nodes, edges = {}, []
    for line in text.splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "node":
            nodes[int(parts[1])] = (parts[2], (int(parts[3]), int(parts[4])), int(parts[5]))
        elif parts[0] == "edge":
            k = int(parts[4])
            flat = [int(v) for v in parts[5:5 + 2 * k]]
            edges.append((int(parts[1]), int(parts[2]), float(parts[3]), list(zip(flat[::2], flat[1::2]))))
        else:
            raise ValueError(f"unrecognised graph dump line: {line!r}")
    return nodes, edges
