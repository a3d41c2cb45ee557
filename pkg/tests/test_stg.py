import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stgexplore import stg
from stgexplore.explorer import ExplorerConfig, run_episode
from stgexplore.skeleton import SkeletonField, batch_extract
from stgexplore.stg import BranchId, GraphContractError, NodeType, NotReadyError, TopoGraph
from stgexplore.world import FREE, OccupancyGrid, RobotState, SensorModel, sense

from conftest import fully_observed, grid_from_rows, load_fixture

T, C, B, I = NodeType.TERMINATION, NodeType.CONNECTION, NodeType.BRANCH, NodeType.INFLOW


def _graph(rows, start, sensor=None):
    truth = grid_from_rows(rows)
    if sensor is None:
        grid = fully_observed(truth)
    else:
        grid = OccupancyGrid.like(truth)
        sense(truth, grid, RobotState.at_cell(start, 1.0, 1.0), SensorModel(sensor))
    sk = batch_extract(grid)
    graph = stg.init(sk, start)
    stg.update(graph, sk)
    assert stg.check_invariants(graph) == []
    return graph, sk


def _types(graph):
    return {n.cell: n.type for n in graph.nodes.values() if n.type != C}


def test_init_on_skeleton_cell():
    graph, _ = _graph(["#" * 12, "#" + "." * 10 + "#", "#" * 12], (4, 1))
    assert graph.nodes[graph.home].cell == (4, 1)


def test_init_tie_break():
    sk = SkeletonField(3, 1)
    for x in (0, 2):
        sk.occ[1, x + 1] = FREE
        sk.state[1, x + 1] = FREE
    graph = stg.init(sk, (1, 0))
    assert graph.nodes[graph.home].cell == (0, 0)


def test_init_empty_skeleton():
    with pytest.raises(NotReadyError):
        stg.init(SkeletonField(4, 4), (0, 0))


def test_straight_corridor_partial():
    graph, _ = _graph(["#" * 14, "#" + "." * 12 + "#", "#" * 14], (1, 1), sensor=5.0)
    tips = [n for n in graph.nodes.values() if n.type == T]
    assert len(tips) == 1 and tips[0].cell == (6, 1)
    assert tips[0].id in graph.frontier
    inner = [n for n in graph.nodes.values() if n.id not in (graph.home, tips[0].id)]
    assert inner and all(n.type == C for n in inner)
    assert len(graph.edges) == 1


T_SHAPE = ["#" * 17] + ["#" + "." * 15 + "#"] * 5 + ["#" * 6 + "." * 5 + "#" * 6] * 6 + ["#" * 17]


def test_t_shape_one_junction():
    graph, _ = _graph(T_SHAPE, (8, 10))
    junctions = [n for n in graph.nodes.values() if n.type == B and n.id != graph.home]
    assert len(junctions) == 1
    j = junctions[0]
    assert len(j.children) == 2
    ends = set()
    for c in j.children:
        while graph.nodes[c].type == C:
            c = graph.nodes[c].children[0]
        ends.add(graph.nodes[c].type)
    assert ends == {T}


def test_empty_frontier_no_change():
    graph, sk = _graph(T_SHAPE, (8, 10))
    assert graph.frontier == []
    before = stg.dump(graph)
    stg.update(graph, sk)
    assert stg.dump(graph) == before


def test_fake_inflow_discarded():
    g = TopoGraph()
    root = g.add_node((0, 0), 0)
    g.home = root.id
    a = g.add_node((1, 0), 0, root.id)
    b = g.add_node((0, 1), 0, root.id)
    for n in (root.id, a.id, b.id):
        g.set_type(n)
    g.inflow_candidates = [(a.id, b.id)]
    stg.resolve_inflows(g, step=1)
    assert g.last_fake_inflows == 1 and g.last_inflows == 0
    assert g.count_types()[I] == 0
    g.inflow_candidates = []
    stg.resolve_inflows(g)
    assert g.last_inflows == 0


def test_ring_one_inflow():
    graph, _ = _graph(_ring_rows(), _ring_start())
    assert graph.count_types()[I] == 1
    (inflow,) = [n for n in graph.nodes.values() if n.type == I]
    assert len(inflow.parents) == 2


def _ring_rows():
    m = load_fixture("ring")
    return ["".join("." if v == FREE else "#" for v in row) for row in m.cells]


def _ring_start():
    return load_fixture("ring").start


NOTCH = ["#" * 20] + ["#" + "." * 18 + "#"] * 5 + ["#" * 9 + "." + "#" * 10] * 2 + ["#" * 20]


def test_notch_spur_pruned():
    graph, sk = _graph(NOTCH, (1, 3))
    assert graph.last_pruned > 0
    assert all(c[0] == 9 and c[1] >= 4 for c in graph.pruned_cells)
    # the corridor line survives as one chain from home to the far tip
    assert _types(graph) == {(3, 3): B, (15, 3): T}
    assert all(graph.node_at(c) is not None for c in sk.skeleton_cells() - graph.pruned_cells)


def test_notch_junction_retyped():
    graph, _ = _graph(NOTCH, (1, 3))
    node = graph.node_at((9, 3))
    assert node is not None and node.type == C


def test_wide_termination_kept():
    graph, _ = _graph(NOTCH, (1, 3))
    tip = graph.node_at((15, 3))
    assert tip.wave_front >= stg.DEFAULT_THRES and tip.type == T


def test_prune_threshold_zero_keeps_spur():
    truth = grid_from_rows(NOTCH)
    sk = batch_extract(fully_observed(truth))
    graph = stg.init(sk, (1, 3))
    stg.update(graph, sk, thres=0)
    assert graph.last_pruned == 0
    assert graph.node_at((9, 7)) is not None


def _chain(types):
    g = TopoGraph()
    prev = None
    for i, _ in enumerate(types):
        n = g.add_node((i, 0), 0, prev)
        prev = n.id
    g.home = 0
    for nid in g.nodes:
        g.set_type(nid)
    return g


def test_compress_chain():
    g = _chain("JCCT")
    stg.rebuild_edges(g)
    assert len(g.edges) == 1
    e = g.edges[0]
    assert (e.a, e.b) == (0, 3)
    assert e.cells == [(1, 0), (2, 0)]
    assert e.length == pytest.approx(3.0)


def test_no_connections_mirror_links():
    g = TopoGraph()
    root = g.add_node((1, 1), 0)
    g.home = root.id
    kids = [g.add_node(c, 0, root.id) for c in [(0, 0), (2, 0), (2, 2)]]
    for n in g.nodes:
        g.set_type(n)
    stg.rebuild_edges(g)
    assert sorted((e.a, e.b) for e in g.edges) == [(0, k.id) for k in kids]
    assert all(e.cells == [] for e in g.edges)
    assert g.edges[0].length == pytest.approx(np.sqrt(2))


def test_branch_of_under_home():
    g = _chain("JCT")
    assert stg.branch_of(g, 2) == BranchId(0, 1)
    with pytest.raises(GraphContractError):
        stg.branch_of(g, 99)


def test_branch_of_distinct_children():
    graph, _ = _graph(T_SHAPE, (8, 10))
    tips = [n.id for n in graph.nodes.values() if n.type == T]
    ids = {stg.branch_of(graph, t) for t in tips}
    assert len(ids) == 2
    assert len({b.junction for b in ids}) == 1


def test_y_maze_three_frontiers_two_branches():
    seen = []

    def observer(sim, ex, rec):
        g = sim.graph
        junctions = [n.id for n in g.nodes.values() if n.type in stg.JUNCTIONS and n.id != g.home]
        if junctions and len(g.frontier) == 3 and not seen:
            seen.append((junctions, {stg.branch_of(g, f) for f in g.frontier}))

    run_episode(load_fixture("y_maze"), ExplorerConfig(), observer=observer)
    (junctions, ids), = seen
    assert len(junctions) == 1
    assert len(ids) == 2
    assert {b.junction for b in ids} == set(junctions)


def test_dump_roundtrip():
    graph, _ = _graph(T_SHAPE, (8, 10))
    nodes, edges = stg.parse_dump(stg.dump(graph))
    assert nodes == {n.id: (n.type.value, n.cell, n.wave_front) for n in graph.nodes.values()}
    assert [(a, b, cells) for a, b, _, cells in edges] == [(e.a, e.b, e.cells) for e in graph.edges]
    assert [round(l, 6) for *_, l, _ in edges] == [round(e.length, 6) for e in graph.edges]
    with pytest.raises(ValueError):
        stg.parse_dump("vertex 1 2")


def test_invariant_checker_detects_damage():
    graph, _ = _graph(T_SHAPE, (8, 10))
    tip = next(n for n in graph.nodes.values() if n.type == T)
    tip.type = C
    assert any(e.startswith("type") for e in stg.check_invariants(graph))


@settings(max_examples=8, deadline=None)
@given(st.sampled_from(["y_maze", "ring", "maze_small"]), st.integers(0, 10**4))
def test_invariants_every_cycle(name, seed):
    errors = []

    def observer(sim, ex, rec):
        if sim.graph is not None:
            errors.extend(stg.check_invariants(sim.graph))
            for f in sim.graph.frontier:
                assert f in sim.graph.nodes

    run_episode(load_fixture(name), ExplorerConfig(seed=seed, max_ticks=400), observer=observer)
    assert errors == []
