"""Immutable undirected graphs: construction, generators, file ingestion.

Node ids are always the contiguous range 0..num_nodes-1.  Graphs loaded
from edge lists keep the original labels in ``original_labels`` so results
can be reported in the source id space.
"""

from __future__ import annotations

import math
from collections import deque
from typing import IO, Iterable, Iterator, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import EdgeListParseError, EmptyGraphError, InvalidParameters


class Graph:
    """Undirected, unweighted graph with sorted adjacency lists.

    Immutable after construction; safe to share across threads/processes.
    Self-loops and duplicate edges are rejected (generators never produce
    them; use ``from_edges(..., dedupe=True)`` for raw input).
    """

    __slots__ = ("_adjacency", "_num_edges", "original_labels", "_csr")

    def __init__(self, num_nodes: int, edges: Iterable[tuple[int, int]],
                 original_labels: Sequence | None = None, dedupe: bool = False):
        if num_nodes < 0:
            raise InvalidParameters("num_nodes must be nonnegative")
        neighbor_sets: list[set[int]] = [set() for _ in range(num_nodes)]
        count = 0
        for u, v in edges:
            if not (0 <= u < num_nodes and 0 <= v < num_nodes):
                raise InvalidParameters(f"edge ({u},{v}) out of range 0..{num_nodes - 1}")
            if u == v:
                if dedupe:
                    continue
                raise InvalidParameters(f"self-loop at node {u}")
            if v in neighbor_sets[u]:
                if dedupe:
                    continue
                raise InvalidParameters(f"duplicate edge ({u},{v})")
            neighbor_sets[u].add(v)
            neighbor_sets[v].add(u)
            count += 1
        self._adjacency: tuple[tuple[int, ...], ...] = tuple(
            tuple(sorted(s)) for s in neighbor_sets
        )
        self._num_edges = count
        self.original_labels = list(original_labels) if original_labels is not None else None
        self._csr: sp.csr_matrix | None = None

    @classmethod
    def from_edges(cls, num_nodes: int, edges: Iterable[tuple[int, int]],
                   dedupe: bool = False) -> "Graph":
        return cls(num_nodes, edges, dedupe=dedupe)

    @property
    def num_nodes(self) -> int:
        return len(self._adjacency)

    @property
    def num_edges(self) -> int:
        return self._num_edges

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._adjacency[v]

    def degree(self, v: int) -> int:
        return len(self._adjacency[v])

    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self._adjacency], dtype=np.int64)

    def has_edge(self, u: int, v: int) -> bool:
        a = self._adjacency[u]
        if len(a) > len(self._adjacency[v]):
            a, u, v = self._adjacency[v], v, u
        lo, hi = 0, len(a)
        while lo < hi:
            mid = (lo + hi) // 2
            if a[mid] < v:
                lo = mid + 1
            else:
                hi = mid
        return lo < len(a) and a[lo] == v

    def edges(self) -> Iterator[tuple[int, int]]:
        """All edges as (u, v) with u < v, in sorted order."""
        for u, nbrs in enumerate(self._adjacency):
            for v in nbrs:
                if u < v:
                    yield (u, v)

    def adjacency_csr(self) -> sp.csr_matrix:
        """Cached sparse adjacency matrix (0/1, symmetric)."""
        if self._csr is None:
            indptr = np.zeros(self.num_nodes + 1, dtype=np.int64)
            for u, nbrs in enumerate(self._adjacency):
                indptr[u + 1] = indptr[u] + len(nbrs)
            indices = np.fromiter(
                (v for nbrs in self._adjacency for v in nbrs),
                dtype=np.int64, count=int(indptr[-1]),
            )
            data = np.ones(len(indices), dtype=np.float64)
            self._csr = sp.csr_matrix(
                (data, indices, indptr), shape=(self.num_nodes, self.num_nodes)
            )
        return self._csr

    def connected_components(self) -> list[list[int]]:
        seen = [False] * self.num_nodes
        components = []
        for s in range(self.num_nodes):
            if seen[s]:
                continue
            comp = [s]
            seen[s] = True
            queue = deque([s])
            while queue:
                u = queue.popleft()
                for v in self._adjacency[u]:
                    if not seen[v]:
                        seen[v] = True
                        comp.append(v)
                        queue.append(v)
            components.append(comp)
        return components

    def is_connected(self) -> bool:
        if self.num_nodes == 0:
            return False
        return bool(np.isfinite(shortest_path_hops(self, 0)).all())

    def __repr__(self) -> str:
        return f"Graph(n={self.num_nodes}, m={self.num_edges})"


class NeighborOracle:
    """On-demand access to neighbor lists of a possibly hidden graph.

    ``reveal`` is idempotent; the revealed set only grows.  A single run
    owns one oracle (single-writer); completed bookkeeping is safe to read
    concurrently.
    """

    def __init__(self, graph: Graph, hidden: bool = False):
        self.graph = graph
        self.hidden = hidden
        self._revealed: set[int] = set()
        self._observed: set[int] = set()  # ids seen as someone's neighbor

    def reveal(self, v: int) -> tuple[int, ...]:
        nbrs = self.graph.neighbors(v)
        if v not in self._revealed:
            self._revealed.add(v)
            self._observed.add(v)
            self._observed.update(nbrs)
        return nbrs

    @property
    def reveal_count(self) -> int:
        return len(self._revealed)

    @property
    def revealed_nodes(self) -> frozenset[int]:
        return frozenset(self._revealed)

    def candidate_nodes(self) -> list[int]:
        """Node pool for random draws: the full id range when the graph is
        known, otherwise every id this oracle has seen so far."""
        if not self.hidden:
            return list(range(self.graph.num_nodes))
        pool = self._revealed | self._observed
        return sorted(pool)

    @property
    def num_nodes(self) -> int:
        return self.graph.num_nodes


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------

def generate_ba(n: int, m: int, seed: int) -> Graph:
    """Preferential-attachment graph: each new node attaches to m existing
    nodes with probability proportional to current degree.

    Starts from m seed nodes; the first arrival links to all of them, so the
    result is connected.
    """
    if n <= m or m < 1:
        raise InvalidParameters(f"require n > m >= 1, got n={n}, m={m}")
    rng = np.random.default_rng(seed)
    edges: list[tuple[int, int]] = []
    # Flat list with each node repeated once per unit of degree; uniform
    # draws from it realize degree-proportional attachment.
    repeated: list[int] = []
    targets = list(range(m))
    for new in range(m, n):
        chosen = set(targets)
        for t in chosen:
            edges.append((t, new))
        repeated.extend(chosen)
        repeated.extend([new] * len(chosen))
        if new + 1 < n:
            picked: set[int] = set()
            while len(picked) < m:
                picked.add(repeated[rng.integers(0, len(repeated))])
            targets = list(picked)
    return Graph(n, edges)


def generate_ws(n: int, k_ring: int, p: float, seed: int) -> Graph:
    """Ring lattice of degree k_ring with each edge rewired with probability p.

    Rewiring replaces one endpoint, so the edge count stays n*k_ring/2.
    """
    if k_ring % 2 != 0:
        raise InvalidParameters(f"k_ring must be even, got {k_ring}")
    if n <= k_ring or k_ring < 2:
        raise InvalidParameters(f"require n > k_ring >= 2, got n={n}, k_ring={k_ring}")
    if not 0.0 <= p <= 1.0:
        raise InvalidParameters(f"p must be in [0,1], got {p}")
    rng = np.random.default_rng(seed)
    neighbor_sets: list[set[int]] = [set() for _ in range(n)]
    for d in range(1, k_ring // 2 + 1):
        for u in range(n):
            v = (u + d) % n
            neighbor_sets[u].add(v)
            neighbor_sets[v].add(u)
    for d in range(1, k_ring // 2 + 1):
        for u in range(n):
            v = (u + d) % n
            if rng.random() >= p:
                continue
            if len(neighbor_sets[u]) >= n - 1:
                continue  # u already adjacent to everyone else
            while True:
                w = int(rng.integers(0, n))
                if w != u and w not in neighbor_sets[u]:
                    break
            neighbor_sets[u].discard(v)
            neighbor_sets[v].discard(u)
            neighbor_sets[u].add(w)
            neighbor_sets[w].add(u)
    edges = [(u, v) for u in range(n) for v in neighbor_sets[u] if u < v]
    return Graph(n, edges)


def generate_sbm(cluster_sizes: Sequence[int], p_within: float, p_between: float,
                 seed: int) -> Graph:
    """Stochastic block model with one shared within- and between-cluster
    edge probability."""
    if len(cluster_sizes) == 0 or any(s <= 0 for s in cluster_sizes):
        raise InvalidParameters(f"cluster sizes must be positive, got {cluster_sizes}")
    for name, prob in (("p_within", p_within), ("p_between", p_between)):
        if not 0.0 <= prob <= 1.0:
            raise InvalidParameters(f"{name} must be in [0,1], got {prob}")
    rng = np.random.default_rng(seed)
    sizes = list(cluster_sizes)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    n = int(offsets[-1])
    edges: list[tuple[int, int]] = []
    for i in range(len(sizes)):
        for j in range(i, len(sizes)):
            prob = p_within if i == j else p_between
            if prob == 0.0:
                continue
            ni, nj = sizes[i], sizes[j]
            mask = rng.random((ni, nj)) < prob
            if i == j:
                mask = np.triu(mask, k=1)
            us, vs = np.nonzero(mask)
            base_i, base_j = int(offsets[i]), int(offsets[j])
            edges.extend(zip((us + base_i).tolist(), (vs + base_j).tolist()))
    return Graph(n, edges)


def generate_grid2d(rows: int, cols: int) -> Graph:
    """4-neighbor lattice with rows*cols nodes."""
    if rows < 1 or cols < 1:
        raise InvalidParameters(f"grid dims must be >= 1, got {rows}x{cols}")
    edges = []
    for r in range(rows):
        for c in range(cols):
            u = r * cols + c
            if c + 1 < cols:
                edges.append((u, u + 1))
            if r + 1 < rows:
                edges.append((u, u + cols))
    return Graph(rows * cols, edges)


# ---------------------------------------------------------------------------
# Edge-list ingestion / output
# ---------------------------------------------------------------------------

def load_edge_list(source: IO[str] | Iterable[str]) -> Graph:
    """Parse whitespace-separated integer pairs, one edge per line.

    '#' starts a comment; blank lines are skipped.  Ids are compacted to
    0..N-1 in first-appearance order (original labels preserved on the
    graph); duplicate edges and self-loops are dropped.
    """
    id_of: dict[int, int] = {}
    labels: list[int] = []
    edges: list[tuple[int, int]] = []

    def compact(label: int) -> int:
        idx = id_of.get(label)
        if idx is None:
            idx = len(labels)
            id_of[label] = idx
            labels.append(label)
        return idx

    for line_number, raw in enumerate(source, start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        parts = text.split()
        if len(parts) != 2:
            raise EdgeListParseError(line_number, f"expected two fields, got {len(parts)}")
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise EdgeListParseError(line_number, f"non-integer node id in {parts!r}") from None
        edges.append((compact(a), compact(b)))
    return Graph(len(labels), edges, original_labels=labels, dedupe=True)


def save_edge_list(graph: Graph, sink: IO[str]) -> None:
    """Write one 'u v' line per edge, in original labels when present."""
    labels = graph.original_labels
    for u, v in graph.edges():
        if labels is not None:
            sink.write(f"{labels[u]} {labels[v]}\n")
        else:
            sink.write(f"{u} {v}\n")


# ---------------------------------------------------------------------------
# Transforms and traversal
# ---------------------------------------------------------------------------

def line_graph(g: Graph) -> tuple[Graph, list[tuple[int, int]]]:
    """Line graph plus the map from line-graph node id to original edge.

    Two line-graph nodes are adjacent iff their edges share an endpoint.
    """
    edge_list = list(g.edges())
    if not edge_list:
        raise EmptyGraphError("line graph needs at least one edge")
    edge_id = {e: i for i, e in enumerate(edge_list)}
    lg_edges: list[tuple[int, int]] = []
    for v in range(g.num_nodes):
        incident = [
            edge_id[(min(v, w), max(v, w))] for w in g.neighbors(v)
        ]
        for i in range(len(incident)):
            for j in range(i + 1, len(incident)):
                a, b = incident[i], incident[j]
                lg_edges.append((min(a, b), max(a, b)))
    return Graph(len(edge_list), set(lg_edges)), edge_list


def shortest_path_hops(g: Graph, src: int) -> np.ndarray:
    """BFS hop distances from src; unreachable nodes get +inf."""
    if not 0 <= src < g.num_nodes:
        raise InvalidParameters(f"source {src} out of range")
    dist = np.full(g.num_nodes, np.inf)
    dist[src] = 0.0
    queue = deque([src])
    while queue:
        u = queue.popleft()
        du = dist[u]
        for v in g.neighbors(u):
            if math.isinf(dist[v]):
                dist[v] = du + 1.0
                queue.append(v)
    return dist


def diameter_at_least(g: Graph, bound: int) -> bool:
    """True if the diameter is provably >= bound (double-sweep lower bound)."""
    if g.num_nodes == 0:
        return False
    d0 = shortest_path_hops(g, 0)
    finite = np.where(np.isfinite(d0))[0]
    far = int(finite[np.argmax(d0[finite])])
    d1 = shortest_path_hops(g, far)
    ecc = d1[np.isfinite(d1)].max()
    return bool(ecc >= bound)


def diameter(g: Graph) -> int:
    """Exact diameter of the (assumed connected) graph via all-source BFS."""
    if g.num_nodes == 0:
        raise EmptyGraphError("diameter of empty graph")
    best = 0.0
    for s in range(g.num_nodes):
        d = shortest_path_hops(g, s)
        finite = d[np.isfinite(d)]
        best = max(best, float(finite.max()))
    return int(best)
