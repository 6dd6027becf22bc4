"""The combinatorial graph over k-node subsets and its local sampler.

A combo-node is a canonical sorted tuple of k distinct node ids.  Two
combo-nodes are adjacent iff they differ in exactly one element and the two
differing elements are adjacent in the underlying graph.  Subgraphs of this
space are sampled recursively around a focal combo-node, revealing only the
neighborhoods of element nodes, so the underlying graph may be hidden.
"""

from __future__ import annotations

from bisect import bisect_left
from collections import deque
from dataclasses import dataclass, field
from math import comb, inf
from typing import IO, Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import shortest_path

from .errors import CapExceeded, InvalidParameters, MismatchedSubsetSize
from .graphs import Graph, NeighborOracle
from .spectral import SpectralBasis, eigendecompose, laplacian_from_adjacency

ComboNode = tuple[int, ...]


def combo_node(elements: Iterable[int], num_nodes: int | None = None) -> ComboNode:
    """Canonicalize an id collection into a sorted, validated combo-node."""
    node = tuple(sorted(int(v) for v in elements))
    if len(set(node)) != len(node):
        raise InvalidParameters(f"subset has repeated elements: {node}")
    if len(node) == 0:
        raise InvalidParameters("subset must be nonempty")
    if num_nodes is not None and (node[0] < 0 or node[-1] >= num_nodes):
        raise InvalidParameters(f"subset {node} out of range 0..{num_nodes - 1}")
    return node


def is_combo_edge(a: ComboNode, b: ComboNode, g: Graph) -> bool:
    """Adjacency predicate: one differing element pair, adjacent in g."""
    if len(a) != len(b):
        raise MismatchedSubsetSize(f"k mismatch: {len(a)} vs {len(b)}")
    sa, sb = set(a), set(b)
    only_a = sa - sb
    only_b = sb - sa
    if len(only_a) != 1 or len(only_b) != 1:
        return False
    return g.has_edge(next(iter(only_a)), next(iter(only_b)))


def _substitutions(subset: ComboNode, reveal) -> list[ComboNode]:
    """All one-element substitutions (v -> v' with v' a neighbor of v not in
    the subset), with multiplicity; callers dedupe as needed."""
    members = set(subset)
    out: list[ComboNode] = []
    for j, v in enumerate(subset):
        rest = subset[:j] + subset[j + 1 :]
        for w in reveal(v):
            if w in members:
                continue
            pos = bisect_left(rest, w)
            out.append(rest[:pos] + (w,) + rest[pos:])
    return out


def combo_neighbors(subset: ComboNode, oracle: NeighborOracle) -> list[ComboNode]:
    """Deduplicated combo-neighbors of a combo-node, sorted for determinism.

    Only the neighborhoods of the subset's own elements are revealed.
    """
    return sorted(set(_substitutions(subset, oracle.reveal)))


def combo_degree(subset: ComboNode, g: Graph) -> int:
    """Sum over elements of the neighbors falling outside the subset.

    Equals the combo-graph degree (distinct substitutions always yield
    distinct subsets on simple graphs).
    """
    members = set(subset)
    total = 0
    for v in subset:
        total += sum(1 for w in g.neighbors(v) if w not in members)
    return total


def set_difference_distance(a: ComboNode, b: ComboNode) -> int:
    """|a \\ b|: lower bound on combo-graph hop distance; recorder proxy."""
    if len(a) != len(b):
        raise MismatchedSubsetSize(f"k mismatch: {len(a)} vs {len(b)}")
    return len(set(a) - set(b))


@dataclass
class ComboSubgraph:
    """Locally sampled ego-subgraph of the combo-graph.

    nodes[i] is the combo-node at local index i; adjacency is over local
    indices; center is local index 0; hop_of[i] is the recursion depth at
    which node i was discovered.  The spectral basis is computed once at
    construction and cached (recomputed only by sampling a new subgraph).
    """

    nodes: list[ComboNode]
    adjacency: list[list[int]]
    hop_of: list[int]
    center: int = 0
    basis: SpectralBasis | None = None
    index: dict[ComboNode, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.index:
            self.index = {node: i for i, node in enumerate(self.nodes)}

    @property
    def size(self) -> int:
        return len(self.nodes)

    def num_edges(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    def edge_set(self) -> set[tuple[ComboNode, ComboNode]]:
        out = set()
        for i, nbrs in enumerate(self.adjacency):
            for j in nbrs:
                if i < j:
                    a, b = self.nodes[i], self.nodes[j]
                    out.add((a, b) if a <= b else (b, a))
        return out

    def ensure_basis(self) -> SpectralBasis:
        if self.basis is None:
            self.basis = eigendecompose(laplacian_from_adjacency(self.adjacency))
        return self.basis

    def local_diameter(self) -> int:
        """Hop diameter of the subgraph (connected by construction).

        A double-sweep lower bound short-circuits the all-pairs scan: the
        only consumer clamps diameters at 5, so any bound >= 5 is exact
        enough.  Small or genuinely flat subgraphs fall back to an exact
        C-level all-pairs pass.
        """
        if self.size <= 1:
            return 0
        d0 = _bfs_adjacency(self.adjacency, 0)
        far = max(range(self.size), key=lambda i: d0[i])
        d1 = _bfs_adjacency(self.adjacency, far)
        bound = max(d1)
        if bound >= 5:
            return bound
        rows = [i for i, nbrs in enumerate(self.adjacency) for _ in nbrs]
        cols = [j for nbrs in self.adjacency for j in nbrs]
        mat = sp.csr_matrix(
            (np.ones(len(rows)), (rows, cols)), shape=(self.size, self.size)
        )
        dist = shortest_path(mat, method="D", unweighted=True)
        finite = dist[np.isfinite(dist)]
        return int(finite.max())

    def dump(self, sink: IO[str]) -> None:
        """Structured text dump: node id-tuples, then edge index pairs."""
        sink.write(f"nodes {self.size} center {self.center}\n")
        for i, node in enumerate(self.nodes):
            sink.write(f"n {i} hop {self.hop_of[i]} : {' '.join(map(str, node))}\n")
        for i, nbrs in enumerate(self.adjacency):
            for j in nbrs:
                if i < j:
                    sink.write(f"e {i} {j}\n")


def _bfs_adjacency(adjacency: Sequence[Sequence[int]], src: int) -> list[int]:
    dist = [-1] * len(adjacency)
    dist[src] = 0
    queue = deque([src])
    while queue:
        u = queue.popleft()
        for v in adjacency[u]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def sample_combo_subgraph(center: ComboNode, q_cap: int, max_hop: float,
                          oracle: NeighborOracle, rng: np.random.Generator,
                          compute_basis: bool = True) -> ComboSubgraph:
    """Recursive ego-subgraph sampling around a focal combo-node.

    Hop by hop, every combo-node discovered at the previous hop is expanded
    by one-element substitutions; edges to already-present combo-nodes are
    added as they are found.  Expansion stops as soon as the node count
    passes q_cap (surplus is dropped uniformly at random from the newest
    hop only; the center and completed hops are never dropped) or when
    max_hop is exceeded.
    """
    if q_cap < 1:
        raise InvalidParameters(f"q_cap must be >= 1, got {q_cap}")
    if max_hop < 1:
        raise InvalidParameters(f"max_hop must be >= 1, got {max_hop}")
    nodes: list[ComboNode] = [center]
    index: dict[ComboNode, int] = {center: 0}
    hop_of: list[int] = [0]
    neighbor_sets: list[set[int]] = [set()]

    frontier = [0]
    hop = 1
    overflow = False
    while frontier and hop <= max_hop and not overflow:
        discovered: list[int] = []
        for ui in frontier:
            for cand in _substitutions(nodes[ui], oracle.reveal):
                vi = index.get(cand)
                if vi is None:
                    vi = len(nodes)
                    index[cand] = vi
                    nodes.append(cand)
                    hop_of.append(hop)
                    neighbor_sets.append(set())
                    discovered.append(vi)
                if vi != ui:
                    neighbor_sets[ui].add(vi)
                    neighbor_sets[vi].add(ui)
            if len(nodes) > q_cap:
                overflow = True
                break
        if overflow:
            surplus = len(nodes) - q_cap
            drop = set(
                int(i) for i in rng.choice(np.array(discovered), size=surplus, replace=False)
            )
            keep = [i for i in range(len(nodes)) if i not in drop]
            remap = {old: new for new, old in enumerate(keep)}
            nodes = [nodes[i] for i in keep]
            hop_of = [hop_of[i] for i in keep]
            neighbor_sets = [
                {remap[j] for j in neighbor_sets[i] if j not in drop} for i in keep
            ]
            index = {node: i for i, node in enumerate(nodes)}
        else:
            frontier = discovered
            hop += 1

    adjacency = [sorted(s) for s in neighbor_sets]
    subgraph = ComboSubgraph(nodes=nodes, adjacency=adjacency, hop_of=hop_of,
                             center=0, index=index)
    if compute_basis:
        subgraph.ensure_basis()
    return subgraph


def brute_force_combo_graph(g: Graph, k: int, cap: int = 200_000
                            ) -> tuple[list[ComboNode], list[tuple[int, int]]]:
    """Fully enumerated combo-graph (test oracle; desk scale only).

    Returns all C(N, k) combo-nodes in lexicographic order and the edge
    list over their indices.
    """
    n = g.num_nodes
    if k < 1 or k > n:
        raise InvalidParameters(f"k={k} invalid for graph with {n} nodes")
    total = comb(n, k)
    if total > cap:
        raise CapExceeded(f"C({n},{k}) = {total} exceeds cap {cap}")
    from itertools import combinations

    nodes: list[ComboNode] = list(combinations(range(n), k))
    index = {node: i for i, node in enumerate(nodes)}
    edges: list[tuple[int, int]] = []
    seen_edges: set[tuple[int, int]] = set()
    for i, subset in enumerate(nodes):
        members = set(subset)
        for j_pos, v in enumerate(subset):
            rest = subset[:j_pos] + subset[j_pos + 1 :]
            for w in g.neighbors(v):
                if w in members:
                    continue
                pos = bisect_left(rest, w)
                other = rest[:pos] + (w,) + rest[pos:]
                j = index[other]
                key = (i, j) if i < j else (j, i)
                if key not in seen_edges:
                    seen_edges.add(key)
                    edges.append(key)
    edges.sort()
    return nodes, edges


def combo_hop_distance(edges: Sequence[tuple[int, int]], a: int, b: int,
                       num_nodes: int | None = None) -> float:
    """BFS hop distance between indices a and b over an edge list; inf if
    disconnected."""
    if a == b:
        return 0.0
    n = num_nodes if num_nodes is not None else (max(max(e) for e in edges) + 1 if edges else max(a, b) + 1)
    adjacency: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        adjacency[u].append(v)
        adjacency[v].append(u)
    dist = _bfs_adjacency(adjacency, a)
    return float(dist[b]) if dist[b] >= 0 else inf


def adjacency_from_edges(num_nodes: int, edges: Sequence[tuple[int, int]]) -> list[list[int]]:
    """Adjacency lists over local indices from an index edge list."""
    adjacency: list[list[int]] = [[] for _ in range(num_nodes)]
    for u, v in edges:
        adjacency[u].append(v)
        adjacency[v].append(u)
    for lst in adjacency:
        lst.sort()
    return adjacency


def all_pairs_hops(adjacency: Sequence[Sequence[int]]) -> np.ndarray:
    """Dense hop-distance matrix (float, inf when unreachable)."""
    n = len(adjacency)
    out = np.full((n, n), np.inf)
    for s in range(n):
        dist = _bfs_adjacency(adjacency, s)
        for v, d in enumerate(dist):
            if d >= 0:
                out[s, v] = d
    return out
