import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphcombo.errors import EdgeListParseError, EmptyGraphError, InvalidParameters
from graphcombo.graphs import (Graph, NeighborOracle, diameter, generate_ba,
                               generate_grid2d, generate_sbm, generate_ws,
                               line_graph, load_edge_list, save_edge_list,
                               shortest_path_hops)


def assert_well_formed(g: Graph):
    for u in range(g.num_nodes):
        for v in g.neighbors(u):
            assert u != v, "self-loop"
            assert u in g.neighbors(v), "asymmetric adjacency"
        assert list(g.neighbors(u)) == sorted(set(g.neighbors(u)))


class TestGenerateBA:
    def test_rejects_bad_parameters(self):
        with pytest.raises(InvalidParameters):
            generate_ba(3, 3, seed=0)
        with pytest.raises(InvalidParameters):
            generate_ba(5, 0, seed=0)

    def test_m1_yields_tree(self):
        g = generate_ba(3, 1, seed=0)
        assert g.num_nodes == 3
        assert g.num_edges == 2
        assert g.is_connected()

    def test_heavy_tail(self):
        g = generate_ba(100, 2, seed=7)
        deg = g.degrees()
        assert deg.max() > 3 * deg.mean()

    def test_edge_count_scale(self):
        # each arrival adds m edges
        g = generate_ba(2000, 5, seed=1)
        assert g.num_edges == (2000 - 5) * 5
        assert g.is_connected()
        assert_well_formed(g)

    def test_seed_reproducible(self):
        a = generate_ba(200, 3, seed=11)
        b = generate_ba(200, 3, seed=11)
        assert list(a.edges()) == list(b.edges())
        c = generate_ba(200, 3, seed=12)
        assert list(a.edges()) != list(c.edges())


class TestGenerateWS:
    def test_exact_edge_count(self):
        for p in (0.0, 0.1, 1.0):
            g = generate_ws(1000, 10, p, seed=3)
            assert g.num_edges == 1000 * 10 // 2
            assert_well_formed(g)

    def test_zero_rewiring_is_ring(self):
        g = generate_ws(10, 2, 0.0, seed=0)
        for u in range(10):
            assert set(g.neighbors(u)) == {(u - 1) % 10, (u + 1) % 10}

    def test_full_rewiring_not_ring(self):
        g = generate_ws(50, 4, 1.0, seed=1)
        assert g.num_edges == 100
        ring = all(
            set(g.neighbors(u)) == {(u - 2) % 50, (u - 1) % 50, (u + 1) % 50, (u + 2) % 50}
            for u in range(50)
        )
        assert not ring

    def test_odd_ring_degree_rejected(self):
        with pytest.raises(InvalidParameters):
            generate_ws(10, 3, 0.1, seed=0)


class TestGenerateSBM:
    def test_single_full_cluster_is_complete(self):
        g = generate_sbm([7], 1.0, 0.0, seed=0)
        assert g.num_edges == 7 * 6 // 2

    def test_zero_between_probability(self):
        g = generate_sbm([100, 100], 0.1, 0.0, seed=3)
        assert all((u < 100) == (v < 100) for u, v in g.edges())

    def test_expected_edge_count(self):
        g = generate_sbm([250] * 4, 5e-2, 1e-3, seed=5)
        within = 4 * (250 * 249 // 2) * 5e-2
        between = (1000 * 1000 - 4 * 250 * 250) / 2 * 1e-3
        expected = within + between
        assert abs(g.num_edges - expected) < 0.1 * expected

    def test_empty_cluster_rejected(self):
        with pytest.raises(InvalidParameters):
            generate_sbm([10, 0], 0.5, 0.1, seed=0)


class TestGrid2D:
    @pytest.mark.parametrize("rows,cols,nodes,edges", [
        (2, 2, 4, 4),
        (1, 5, 5, 4),
        (50, 100, 5000, 9850),
    ])
    def test_counts(self, rows, cols, nodes, edges):
        g = generate_grid2d(rows, cols)
        assert g.num_nodes == nodes
        assert g.num_edges == edges
        assert 2 * rows * cols - rows - cols == edges


class TestEdgeList:
    def test_path_graph(self):
        g = load_edge_list(io.StringIO("0 1\n1 2"))
        assert g.num_nodes == 3
        assert list(g.edges()) == [(0, 1), (1, 2)]

    def test_drops_duplicates_and_self_loops(self):
        g = load_edge_list(io.StringIO("0 1\n1 0\n0 0"))
        assert g.num_nodes == 2
        assert g.num_edges == 1

    def test_compaction_first_appearance(self):
        g = load_edge_list(io.StringIO("# c\n5 9\n9 7"))
        assert g.num_nodes == 3
        assert g.original_labels == [5, 9, 7]
        assert g.num_edges == 2

    def test_parse_error_carries_line_number(self):
        with pytest.raises(EdgeListParseError) as err:
            load_edge_list(io.StringIO("0 1\nbad line here"))
        assert err.value.line_number == 2
        with pytest.raises(EdgeListParseError) as err:
            load_edge_list(io.StringIO("0 1\n2 x"))
        assert err.value.line_number == 2

    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.tuples(st.integers(0, 30), st.integers(0, 30)),
                    min_size=1, max_size=40))
    def test_round_trip(self, pairs):
        text = "\n".join(f"{a} {b}" for a, b in pairs)
        g = load_edge_list(io.StringIO(text))
        assert_well_formed(g)
        sink = io.StringIO()
        save_edge_list(g, sink)
        g2 = load_edge_list(io.StringIO(sink.getvalue()))
        # same edge set in original label space
        labels, labels2 = g.original_labels, g2.original_labels
        edges = {frozenset((labels[u], labels[v])) for u, v in g.edges()}
        edges2 = {frozenset((labels2[u], labels2[v])) for u, v in g2.edges()}
        assert edges == edges2


class TestLineGraph:
    def test_triangle_self_dual(self):
        g = load_edge_list(io.StringIO("0 1\n1 2\n0 2"))
        lg, edge_map = line_graph(g)
        assert lg.num_nodes == 3
        assert lg.num_edges == 3
        assert len(edge_map) == 3

    def test_path_three_nodes(self):
        lg, _ = line_graph(generate_grid2d(1, 3))
        assert lg.num_nodes == 2
        assert lg.num_edges == 1

    def test_star_becomes_complete(self):
        g = load_edge_list(io.StringIO("0 1\n0 2\n0 3\n0 4"))
        lg, _ = line_graph(g)
        assert lg.num_nodes == 4
        assert lg.num_edges == 6  # K4

    def test_degree_law(self):
        g = generate_ba(60, 2, seed=3)
        lg, edge_map = line_graph(g)
        assert lg.num_nodes == g.num_edges
        for idx, (u, v) in enumerate(edge_map):
            assert lg.degree(idx) == g.degree(u) + g.degree(v) - 2

    def test_empty_graph_rejected(self):
        with pytest.raises(EmptyGraphError):
            line_graph(Graph(3, []))


class TestBfs:
    def test_path_distances(self):
        g = generate_grid2d(1, 3)
        assert shortest_path_hops(g, 0).tolist() == [0.0, 1.0, 2.0]

    def test_self_distance_zero(self):
        g = generate_grid2d(2, 2)
        assert shortest_path_hops(g, 3)[3] == 0

    def test_cycle_antipodal(self):
        g = load_edge_list(io.StringIO("0 1\n1 2\n2 3\n3 4\n4 5\n5 0"))
        assert shortest_path_hops(g, 0)[3] == 3

    def test_unreachable_is_inf(self):
        g = Graph(3, [(0, 1)])
        assert np.isinf(shortest_path_hops(g, 0)[2])

    def test_diameter(self):
        assert diameter(generate_grid2d(1, 5)) == 4


class TestNeighborOracle:
    def test_reveal_idempotent(self):
        g = generate_grid2d(1, 4)
        oracle = NeighborOracle(g)
        first = oracle.reveal(1)
        count = oracle.reveal_count
        assert oracle.reveal(1) == first
        assert oracle.reveal_count == count == 1

    def test_revealed_monotone(self):
        g = generate_grid2d(1, 4)
        oracle = NeighborOracle(g)
        seen = set()
        for v in (0, 2, 2, 1):
            oracle.reveal(v)
            assert oracle.revealed_nodes >= seen
            seen = set(oracle.revealed_nodes)

    def test_hidden_candidate_pool(self):
        g = generate_grid2d(1, 5)
        oracle = NeighborOracle(g, hidden=True)
        assert oracle.candidate_nodes() == []
        oracle.reveal(2)
        assert set(oracle.candidate_nodes()) == {1, 2, 3}
        full = NeighborOracle(g, hidden=False)
        assert full.candidate_nodes() == [0, 1, 2, 3, 4]
