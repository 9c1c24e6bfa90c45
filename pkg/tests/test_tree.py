import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graph_ot import (
    DimensionMismatchError,
    EdgeNotInGraphError,
    NotATreeError,
    SpanningTree,
    build_from_edge_list,
    five_node_example,
    kruskal,
    random_connected_graph,
    read_tree_file,
)


@pytest.fixture
def five_node():
    return five_node_example()


def tree_t1(g):
    return SpanningTree(g, [(1, 2), (2, 3), (3, 4), (4, 5)])


def tree_t2(g):
    return SpanningTree(g, [(2, 3), (3, 4), (4, 5), (1, 5)])


def tree_t3(g):
    return SpanningTree(g, [(2, 3), (1, 3), (1, 5), (4, 5)])


def test_kruskal_spans_five_node_graph(five_node):
    t = kruskal(five_node)
    assert len(t.tree_edges) == 4
    assert set(t.tree_edges) <= set(five_node.edges)


def test_kruskal_deterministic(five_node):
    assert kruskal(five_node).tree_edges == kruskal(five_node).tree_edges


def test_kruskal_triangle_tie_break():
    g = build_from_edge_list([(1, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)])
    assert kruskal(g).tree_edges == [(1, 2), (1, 3)]


def test_kruskal_path_graph_is_identity():
    g = build_from_edge_list([(1, 2, 1.0), (2, 3, 1.0)])
    assert kruskal(g).tree_edges == [(1, 2), (2, 3)]


def test_kruskal_prefers_light_edges():
    # heavy chord is skipped when the light cycle spans already
    g = build_from_edge_list([(1, 2, 1.0), (2, 3, 1.0), (1, 3, 5.0)])
    assert kruskal(g).tree_edges == [(1, 2), (2, 3)]


def test_tree_validation_rejects_cycles(five_node):
    with pytest.raises(NotATreeError):
        SpanningTree(five_node, [(1, 2), (2, 3), (1, 3), (4, 5)])


def test_tree_validation_rejects_wrong_count(five_node):
    with pytest.raises(NotATreeError):
        SpanningTree(five_node, [(1, 2), (2, 3), (3, 4)])


def test_tree_validation_rejects_foreign_edges(five_node):
    with pytest.raises(EdgeNotInGraphError):
        SpanningTree(five_node, [(1, 2), (2, 3), (3, 4), (2, 5)])


def test_path_coefficients_chord_telescopes(five_node):
    t = tree_t1(five_node)
    assert t.tree_path_coefficients((1, 3)) == {(1, 2): 1, (2, 3): 1}


def test_path_coefficients_tree_edge_is_unit(five_node):
    t = tree_t1(five_node)
    assert t.tree_path_coefficients((3, 4)) == {(3, 4): 1}


def test_path_coefficients_signs_follow_orientation(five_node):
    # path 1 -> 5 -> 4 -> 3 -> 2: only (1,5) is traversed low-to-high
    t = tree_t2(five_node)
    assert t.tree_path_coefficients((1, 2)) == {
        (1, 5): 1,
        (4, 5): -1,
        (3, 4): -1,
        (2, 3): -1,
    }


def test_path_coefficients_unknown_edge(five_node):
    t = tree_t1(five_node)
    with pytest.raises(EdgeNotInGraphError):
        t.tree_path_coefficients((2, 5))


def test_expand_zero_is_zero(five_node):
    t = tree_t1(five_node)
    np.testing.assert_array_equal(
        t.expand_velocities(np.zeros(4)), np.zeros(five_node.edge_count)
    )


def test_expand_path_tree_all_ones(five_node):
    # unit flow along the path 1-2-3-4-5 accumulates along chords: the
    # potential rises by 1 per hop, so v_(1,3) = 2 and v_(1,5) = 4
    t = tree_t1(five_node)
    v = t.expand_velocities(np.ones(4))
    expanded = dict(zip(five_node.edges, v))
    assert expanded[(1, 3)] == pytest.approx(2.0)
    assert expanded[(1, 5)] == pytest.approx(4.0)
    assert expanded[(1, 2)] == expanded[(2, 3)] == pytest.approx(1.0)


def test_expand_is_homogeneous(five_node):
    t = tree_t3(five_node)
    v = np.array([0.3, -1.2, 0.7, 2.0])
    np.testing.assert_allclose(
        t.expand_velocities(2.0 * v), 2.0 * t.expand_velocities(v)
    )


def test_expand_reproduces_tree_edges(five_node):
    t = tree_t2(five_node)
    v = np.array([0.5, -0.25, 1.5, -2.0])
    expanded = dict(zip(five_node.edges, t.expand_velocities(v)))
    for f, vf in zip(t.tree_edges, v):
        assert expanded[f] == vf


def test_expand_stacked_levels(five_node):
    t = tree_t1(five_node)
    v = np.arange(8.0).reshape(2, 4)
    out = t.expand_velocities(v)
    assert out.shape == (2, five_node.edge_count)
    np.testing.assert_array_equal(out[0], t.expand_velocities(v[0]))


def test_expand_rejects_bad_shape(five_node):
    t = tree_t1(five_node)
    with pytest.raises(DimensionMismatchError):
        t.expand_velocities(np.zeros(3))


def test_recover_potential_zero(five_node):
    t = tree_t1(five_node)
    np.testing.assert_array_equal(t.recover_potential(np.zeros(4)), np.zeros(5))


def test_recover_potential_path_telescopes():
    g = build_from_edge_list([(1, 2, 1.0), (2, 3, 1.0)])
    t = kruskal(g)
    np.testing.assert_allclose(t.recover_potential(np.array([1.0, 2.0])), [0.0, 1.0, 3.0])


def test_recover_potential_respects_weights():
    g = build_from_edge_list([(1, 2, 4.0)])
    t = kruskal(g)
    # v = (S_2 - S_1) sqrt(omega), so S_2 = v / 2
    np.testing.assert_allclose(t.recover_potential(np.array([1.0])), [0.0, 0.5])


@given(
    st.integers(min_value=2, max_value=10),
    st.integers(min_value=0, max_value=10**6),
    st.integers(min_value=0, max_value=10**6),
)
@settings(max_examples=40, deadline=None)
def test_gauge_consistency_on_random_graphs(n, graph_seed, v_seed):
    # expanded velocities must equal (S_j - S_i) sqrt(omega) for the
    # potential recovered from the same tree velocities
    g = random_connected_graph(n, 0.5, graph_seed)
    t = kruskal(g)
    rng = np.random.Generator(np.random.PCG64(v_seed))
    v_tree = rng.normal(0.0, 2.0, n - 1)
    s = t.recover_potential(v_tree)
    expanded = t.expand_velocities(v_tree)
    for (i, j), ve, w in zip(g.edges, expanded, g.weights):
        assert ve == pytest.approx((s[j - 1] - s[i - 1]) * np.sqrt(w), abs=1e-12)


def test_coefficients_are_signs(five_node):
    for tree in (tree_t1(five_node), tree_t2(five_node), tree_t3(five_node)):
        for e in five_node.edges:
            assert set(tree.tree_path_coefficients(e).values()) <= {-1, 1}


def test_read_tree_file(tmp_path, five_node):
    path = tmp_path / "tree.csv"
    path.write_text("i,j\n2,3\n3,4\n4,5\n1,5\n")
    t = read_tree_file(path, five_node)
    assert t.tree_edges == [(1, 5), (2, 3), (3, 4), (4, 5)]


def test_read_tree_file_rejects_non_tree(tmp_path, five_node):
    path = tmp_path / "tree.csv"
    path.write_text("i,j\n1,2\n2,3\n1,3\n4,5\n")
    with pytest.raises(NotATreeError):
        read_tree_file(path, five_node)
