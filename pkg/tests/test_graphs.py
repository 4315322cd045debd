import numpy as np
import pytest

from qnetsim.engine import make_rng
from qnetsim.graphs import (
    EntGraph,
    graph_to_state,
    measure_pauli_rule,
    vertex_order,
)
from qnetsim.states import ClusterSpec, gate, prepare_cluster


def test_local_complement_isolated_vertex_is_noop():
    g = EntGraph.from_edges([1, 2, 3], [(1, 2)])
    assert g.local_complement(3) == g


def test_local_complement_star_center_gives_complete_graph():
    star = EntGraph.from_edges([0, 1, 2, 3], [(0, 1), (0, 2), (0, 3)])
    k4 = star.local_complement(0)
    assert k4.edge_list() == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


def test_local_complement_path_middle_gives_triangle():
    path = EntGraph.path([1, 2, 3])
    assert path.local_complement(2).edge_list() == [(1, 2), (1, 3), (2, 3)]


def test_local_complement_is_involution(rng):
    for _ in range(40):
        nv = int(rng.integers(1, 9))
        verts = list(range(nv))
        edges = [(u, v) for u in verts for v in verts if u < v and rng.random() < 0.5]
        g = EntGraph.from_edges(verts, edges)
        for a in verts:
            assert g.local_complement(a).local_complement(a) == g


def test_delete_vertex_variants():
    path = EntGraph.path([1, 2, 3])
    assert path.delete_vertex(1).edge_list() == [(2, 3)]
    star = EntGraph.from_edges([0, 1, 2], [(0, 1), (0, 2)])
    assert star.delete_vertex(0).edge_list() == []
    single = EntGraph.from_edges([7])
    assert len(single.delete_vertex(7)) == 0


def test_unknown_vertex_errors():
    g = EntGraph.path([1, 2])
    with pytest.raises(KeyError):
        g.local_complement(9)
    with pytest.raises(KeyError):
        g.delete_vertex(9)
    with pytest.raises(KeyError):
        measure_pauli_rule(g, 9, "Y", 0)


def test_y_rule_on_path_middle_bridges_ends():
    g = EntGraph.path([1, 2, 3])
    for outcome in (0, 1):
        after, plan = measure_pauli_rule(g, 2, "Y", outcome)
        assert after.edge_list() == [(1, 3)]
        assert set(plan.corrections) == {1, 3}
        assert plan.gates_for(1) == (("Sdg",) if outcome == 0 else ("S",))


def test_z_rule_on_path_middle_disconnects():
    g = EntGraph.path([1, 2, 3])
    after, plan = measure_pauli_rule(g, 2, "Z", 0)
    assert after.edge_list() == []
    assert plan.corrections == {}
    after, plan = measure_pauli_rule(g, 2, "Z", 1)
    assert plan.gates_for(1) == ("Z",)


def test_y_rule_isolated_vertex():
    g = EntGraph.from_edges([1, 2], [])
    after, plan = measure_pauli_rule(g, 1, "Y", 0)
    assert after.vertices == frozenset({2})
    assert plan.corrections == {}


def test_y_rule_always_removes_exactly_one_vertex(rng):
    for _ in range(30):
        nv = int(rng.integers(2, 8))
        verts = list(range(nv))
        edges = [(u, v) for u in verts for v in verts if u < v and rng.random() < 0.4]
        g = EntGraph.from_edges(verts, edges)
        a = int(rng.integers(nv))
        after, _ = measure_pauli_rule(g, a, "Y", int(rng.integers(2)))
        assert len(after) == len(g) - 1


def test_x_rule_out_of_scope():
    with pytest.raises(ValueError):
        measure_pauli_rule(EntGraph.path([1, 2]), 1, "X", 0)


def test_graph_to_state_matches_prepare_cluster():
    spec = ClusterSpec(1, 5)
    g = EntGraph.path(list(range(5)))
    st = graph_to_state(g, "ket")
    ref = prepare_cluster(spec, "ket")
    assert abs(st.fidelity(ref) - 1) < 1e-12


def test_graph_to_state_empty_edges_is_plus():
    g = EntGraph.from_edges([0, 1])
    st = graph_to_state(g, "ket")
    np.testing.assert_allclose(st.vector, np.full(4, 0.5), atol=1e-12)


def test_triangle_stabilizers():
    g = EntGraph.from_edges([0, 1, 2], [(0, 1), (1, 2), (0, 2)])
    st = graph_to_state(g, "stab")
    for v in range(3):
        x = np.zeros(3, dtype=np.uint8)
        z = np.zeros(3, dtype=np.uint8)
        x[v] = 1
        z[[u for u in range(3) if u != v]] = 1
        assert st.contains_pauli(x, z, 0)


def test_oracle_equivalence_random_graphs_and_sequences():
    """Symbolic rule == measured state + corrections, exactly (200 cases)."""
    rng = make_rng(0, "oracle")
    for trial in range(200):
        nv = int(rng.integers(2, 9))
        verts = list(range(nv))
        edges = [(u, v) for u in verts for v in verts if u < v and rng.random() < 0.4]
        g = EntGraph.from_edges(verts, edges)
        state = graph_to_state(g, "ket")
        live = vertex_order(g)
        current = g
        for _ in range(int(rng.integers(1, nv))):
            a = live[int(rng.integers(len(live)))]
            basis = "Y" if rng.random() < 0.6 else "Z"
            outcome = state.measure_remove(live.index(a), basis, rng)
            current, plan = measure_pauli_rule(current, a, basis, outcome)
            live.remove(a)
            for v, kinds in plan.corrections.items():
                for kind in kinds:
                    state.apply_gate(gate(kind, live.index(v)))
        if state.n:
            target = graph_to_state(current, "ket")
            assert abs(state.fidelity(target) - 1) < 1e-9, trial
