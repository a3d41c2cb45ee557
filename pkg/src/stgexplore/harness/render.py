"""Deterministic SVG snapshots of the belief grid, skeleton and graph."""
from __future__ import annotations

from xml.sax.saxutils import escape

from .. import stg
from ..world import FREE, OCCUPIED, UNKNOWN

CELL = 8  # px per cell
OCC_FILL = {UNKNOWN: "#808080", FREE: "#ffffff", OCCUPIED: "#000000"}
NODE_FILL = {"T": "#d62728", "C": "#1f77b4", "B": "#2ca02c", "I": "#9467bd"}
SKELETON_FILL = "#9ecae1"


def _c(v: float) -> str:
    # cell coordinate of a centre, formatted without float noise
    return f"{(v + 0.5) * CELL:g}"


def render_snapshot(grid, field=None, graph=None, robot=None, path=None, target=None) -> str:
    """Layers: occupancy, skeleton, graph nodes, graph edges, robot trajectory, planned path, target."""
    w, h = grid.width, grid.height
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w * CELL}" height="{h * CELL}" '
        f'viewBox="0 0 {w * CELL} {h * CELL}">'
    ]
    cells = grid.cells
    out.append('<g id="occupancy" shape-rendering="crispEdges">')
    for y in range(h):
        for x in range(w):
            out.append(f'<rect x="{x * CELL}" y="{y * CELL}" width="{CELL}" height="{CELL}" fill="{OCC_FILL[int(cells[y, x])]}"/>')
    out.append("</g>")
    out.append('<g id="skeleton" shape-rendering="crispEdges">')
    if field is not None:
        mask = field.skeleton_mask
        for y in range(h):
            for x in range(w):
                if mask[y, x]:
                    out.append(f'<rect x="{x * CELL}" y="{y * CELL}" width="{CELL}" height="{CELL}" fill="{SKELETON_FILL}"/>')
    out.append("</g>")
    out.append('<g id="nodes">')
    if graph is not None:
        for nid in sorted(graph.nodes):
            n = graph.nodes[nid]
            t = n.type.value
            out.append(
                f'<circle class="node {t}" data-id="{nid}" cx="{_c(n.cell[0])}" cy="{_c(n.cell[1])}" '
                f'r="{CELL * 0.35:g}" fill="{NODE_FILL[t]}"/>'
            )
    out.append("</g>")
    out.append('<g id="edges" fill="none" stroke="#ff7f0e" stroke-width="1.5">')
    if graph is not None:
        for e in graph.edges:
            pts = " ".join(f"{_c(x)},{_c(y)}" for x, y in stg.edge_path(graph, e))
            out.append(f'<polyline data-a="{e.a}" data-b="{e.b}" points="{pts}"/>')
    out.append("</g>")
    out.append('<g id="trajectory" fill="none" stroke="#e377c2" stroke-width="1">')
    if robot is not None and len(robot.trajectory) > 1:
        res = grid.resolution
        pts = " ".join(f"{x / res * CELL:.3f},{y / res * CELL:.3f}" for x, y in robot.trajectory)
        out.append(f'<polyline points="{escape(pts)}"/>')
    out.append("</g>")
    out.append('<g id="path" fill="none" stroke="#17becf" stroke-width="1" stroke-dasharray="2,2">')
    if path:
        pts = " ".join(f"{_c(x)},{_c(y)}" for x, y in path)
        out.append(f'<polyline points="{pts}"/>')
    out.append("</g>")
    out.append('<g id="target">')
    if target is not None:
        out.append(f'<circle cx="{_c(target[0])}" cy="{_c(target[1])}" r="{CELL * 0.6:g}" fill="none" stroke="#ff00ff" stroke-width="2"/>')
    if robot is not None:
        res = grid.resolution
        x, y = robot.position
        out.append(f'<circle id="robot" cx="{x / res * CELL:.3f}" cy="{y / res * CELL:.3f}" r="{CELL * 0.5:g}" fill="#ffbf00"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
