import io
import math
from itertools import combinations

import numpy as np
import pytest

from graphcombo.combo import (adjacency_from_edges, all_pairs_hops,
                              brute_force_combo_graph, combo_degree,
                              combo_hop_distance, combo_neighbors, combo_node,
                              is_combo_edge, sample_combo_subgraph,
                              set_difference_distance)
from graphcombo.errors import CapExceeded, InvalidParameters, MismatchedSubsetSize
from graphcombo.graphs import (Graph, NeighborOracle, generate_ba,
                               generate_grid2d, generate_ws, load_edge_list)


def path3():
    return generate_grid2d(1, 3)


def cycle(n):
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def random_graph(n, edge_prob, seed):
    rng = np.random.default_rng(seed)
    edges = [(u, v) for u in range(n) for v in range(u + 1, n)
             if rng.random() < edge_prob]
    return Graph(n, edges)


class TestComboNode:
    def test_canonicalizes(self):
        assert combo_node([3, 1, 2]) == (1, 2, 3)

    def test_rejects_duplicates(self):
        with pytest.raises(InvalidParameters):
            combo_node([1, 1, 2])

    def test_rejects_out_of_range(self):
        with pytest.raises(InvalidParameters):
            combo_node([0, 5], num_nodes=3)


class TestIsComboEdge:
    def test_path_examples(self):
        g = path3()
        assert is_combo_edge((0, 2), (1, 2), g)
        assert is_combo_edge((0, 1), (0, 2), g)

    def test_self_is_not_edge(self):
        assert not is_combo_edge((0, 2), (0, 2), path3())

    def test_two_element_difference_fails(self):
        assert not is_combo_edge((0, 2), (1, 3), cycle(4))

    def test_differing_nonadjacent_fails(self):
        assert not is_combo_edge((0, 1), (1, 2), Graph(3, [(0, 1)]))

    def test_k_mismatch(self):
        with pytest.raises(MismatchedSubsetSize):
            is_combo_edge((0, 1), (0, 1, 2), path3())


class TestComboNeighbors:
    def test_path_example(self):
        nbrs = combo_neighbors((0, 2), NeighborOracle(path3()))
        assert set(nbrs) == {(1, 2), (0, 1)}

    def test_isolated_elements(self):
        g = Graph(4, [(0, 1)])
        assert combo_neighbors((2, 3), NeighborOracle(g)) == []

    def test_c4_example(self):
        nbrs = combo_neighbors((0, 2), NeighborOracle(cycle(4)))
        assert set(nbrs) == {(1, 2), (2, 3), (0, 1), (0, 3)}

    def test_reveals_only_member_nodes(self):
        g = generate_ba(30, 2, seed=1)
        oracle = NeighborOracle(g, hidden=True)
        combo_neighbors((3, 7, 11), oracle)
        assert oracle.revealed_nodes == {3, 7, 11}


class TestComboDegree:
    @pytest.mark.parametrize("graph,subset,expected", [
        (cycle(4), (0, 2), 4),
        (Graph(3, [(0, 1), (0, 2), (1, 2)]), (0, 1), 2),
        (generate_grid2d(1, 3), (0, 2), 2),
    ])
    def test_examples(self, graph, subset, expected):
        assert combo_degree(subset, graph) == expected


class TestSetDifferenceDistance:
    def test_examples(self):
        assert set_difference_distance((0, 1), (0, 1)) == 0
        assert set_difference_distance((0, 1), (2, 3)) == 2
        assert set_difference_distance((0, 1, 2), (0, 3, 4)) == 2

    def test_mismatch(self):
        with pytest.raises(MismatchedSubsetSize):
            set_difference_distance((0,), (0, 1))


class TestBruteForce:
    def test_counts(self):
        nodes, _ = brute_force_combo_graph(generate_ba(20, 2, seed=0), 3)
        assert len(nodes) == 1140
        nodes, _ = brute_force_combo_graph(cycle(6), 2)
        assert len(nodes) == 15

    def test_k1_is_isomorphic_to_input(self):
        g = generate_ws(12, 4, 0.3, seed=2)
        nodes, edges = brute_force_combo_graph(g, 1)
        assert [n[0] for n in nodes] == list(range(12))
        assert {(a, b) for a, b in edges} == set(g.edges())

    def test_edges_match_predicate(self):
        g = random_graph(7, 0.4, seed=3)
        nodes, edges = brute_force_combo_graph(g, 2)
        edge_set = set(edges)
        for i, j in combinations(range(len(nodes)), 2):
            expected = is_combo_edge(nodes[i], nodes[j], g)
            assert ((i, j) in edge_set) == expected

    def test_cap(self):
        with pytest.raises(CapExceeded):
            brute_force_combo_graph(generate_ba(50, 2, seed=0), 5, cap=1000)


class TestLemmas:
    """Exhaustive verification of the two structural facts used throughout:
    hop distance is bounded below by the set difference, and the degree
    formula counts exactly the one-element substitutions."""

    @pytest.mark.parametrize("seed", range(4))
    def test_hop_distance_lower_bound(self, seed):
        g = random_graph(9, 0.35, seed=seed)
        nodes, edges = brute_force_combo_graph(g, 2)
        adjacency = adjacency_from_edges(len(nodes), edges)
        hops = all_pairs_hops(adjacency)
        for i, j in combinations(range(len(nodes)), 2):
            if math.isfinite(hops[i, j]):
                assert set_difference_distance(nodes[i], nodes[j]) <= hops[i, j]

    @pytest.mark.parametrize("seed", range(4))
    def test_degree_formula_exact(self, seed):
        g = random_graph(10, 0.3, seed=seed + 10)
        nodes, edges = brute_force_combo_graph(g, 3)
        degree = [0] * len(nodes)
        for a, b in edges:
            degree[a] += 1
            degree[b] += 1
        for idx, subset in enumerate(nodes):
            assert combo_degree(subset, g) == degree[idx]


class TestHopDistance:
    def test_trivial(self):
        edges = [(0, 1), (1, 2)]
        assert combo_hop_distance(edges, 0, 0) == 0
        assert combo_hop_distance(edges, 0, 1) == 1

    def test_c6_pair(self):
        g = cycle(6)
        nodes, edges = brute_force_combo_graph(g, 2)
        index = {node: i for i, node in enumerate(nodes)}
        dist = combo_hop_distance(edges, index[(0, 1)], index[(3, 4)], len(nodes))
        assert dist == 4

    def test_disconnected_inf(self):
        assert math.isinf(combo_hop_distance([(0, 1)], 0, 2, 3))


class TestSampler:
    def test_figure_setting_exact_cap(self):
        # 6-node graph, k=2, cap 6: a subgraph of exactly 6 combo-nodes
        g = cycle(6)
        sub = sample_combo_subgraph((0, 3), 6, math.inf, NeighborOracle(g),
                                    np.random.default_rng(0))
        assert sub.size == 6
        assert sub.nodes[sub.center] == (0, 3)

    def test_cap_one_is_singleton(self):
        sub = sample_combo_subgraph((1, 2), 1, math.inf, NeighborOracle(cycle(5)),
                                    np.random.default_rng(0))
        assert sub.size == 1
        assert sub.num_edges() == 0
        assert sub.basis is not None

    @pytest.mark.parametrize("seed", range(10))
    def test_unbounded_matches_brute_force_component(self, seed):
        g = random_graph(8, 0.35, seed=seed)
        nodes, edges = brute_force_combo_graph(g, 2)
        index = {node: i for i, node in enumerate(nodes)}
        rng = np.random.default_rng(seed)
        center = nodes[rng.integers(0, len(nodes))]
        sub = sample_combo_subgraph(center, len(nodes) + 5, math.inf,
                                    NeighborOracle(g), np.random.default_rng(seed),
                                    compute_basis=False)
        # expected component via BFS on the enumerated combo-graph
        adjacency = adjacency_from_edges(len(nodes), edges)
        hops = all_pairs_hops(adjacency)
        start = index[center]
        component = {i for i in range(len(nodes)) if math.isfinite(hops[start, i])}
        assert {index[n] for n in sub.nodes} == component
        expected_edges = {
            (min(a, b), max(a, b)) for a, b in edges
            if a in component and b in component
        }
        got_edges = {
            (min(index[sub.nodes[i]], index[sub.nodes[j]]),
             max(index[sub.nodes[i]], index[sub.nodes[j]]))
            for i, nbrs in enumerate(sub.adjacency) for j in nbrs if i < j
        }
        assert got_edges == expected_edges

    def test_deterministic(self):
        g = generate_ba(40, 3, seed=7)
        oracle_a, oracle_b = NeighborOracle(g), NeighborOracle(g)
        a = sample_combo_subgraph((0, 1, 2), 50, math.inf, oracle_a,
                                  np.random.default_rng(5), compute_basis=False)
        b = sample_combo_subgraph((0, 1, 2), 50, math.inf, oracle_b,
                                  np.random.default_rng(5), compute_basis=False)
        assert a.nodes == b.nodes
        assert a.adjacency == b.adjacency
        assert a.hop_of == b.hop_of

    def test_connected_and_center_kept(self):
        g = generate_ba(60, 3, seed=3)
        sub = sample_combo_subgraph((4, 9, 17), 40, math.inf, NeighborOracle(g),
                                    np.random.default_rng(1), compute_basis=False)
        assert sub.size == 40
        assert sub.nodes[0] == (4, 9, 17)
        assert sub.hop_of[0] == 0
        dist = all_pairs_hops(sub.adjacency)
        assert np.isfinite(dist[0]).all()

    def test_edges_satisfy_predicate(self):
        g = generate_ba(30, 2, seed=5)
        sub = sample_combo_subgraph((0, 5), 60, math.inf, NeighborOracle(g),
                                    np.random.default_rng(2), compute_basis=False)
        for i, nbrs in enumerate(sub.adjacency):
            for j in nbrs:
                assert is_combo_edge(sub.nodes[i], sub.nodes[j], g)

    def test_hop_cap(self):
        g = cycle(8)
        sub = sample_combo_subgraph((0, 4), 1000, 1, NeighborOracle(g),
                                    np.random.default_rng(0), compute_basis=False)
        assert max(sub.hop_of) <= 1
        assert sub.size == 1 + combo_degree((0, 4), g)

    def test_oracle_economy(self):
        g = generate_ba(200, 3, seed=11)
        oracle = NeighborOracle(g, hidden=True)
        sub = sample_combo_subgraph((0, 3, 8), 80, math.inf, oracle,
                                    np.random.default_rng(4), compute_basis=False)
        members = set()
        for node in sub.nodes:
            members.update(node)
        assert oracle.revealed_nodes <= members

    def test_dump(self):
        sub = sample_combo_subgraph((0, 2), 10, math.inf, NeighborOracle(cycle(5)),
                                    np.random.default_rng(0), compute_basis=False)
        sink = io.StringIO()
        sub.dump(sink)
        text = sink.getvalue()
        assert text.startswith(f"nodes {sub.size} center 0")
        assert text.count("\ne ") == sub.num_edges()
