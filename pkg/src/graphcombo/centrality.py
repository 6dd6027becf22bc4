"""Node-scoring functions used as synthetic objectives."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .errors import ConvergenceError, InvalidParameters
from .graphs import Graph

_MAX_POWER_ITERS = 2000


def degree_centrality(g: Graph) -> np.ndarray:
    """deg(v) / (N - 1) for every node."""
    if g.num_nodes < 2:
        raise InvalidParameters("degree centrality needs at least 2 nodes")
    return g.degrees() / float(g.num_nodes - 1)


def eigenvector_centrality(g: Graph, tol: float = 1e-8, max_iter: int = _MAX_POWER_ITERS) -> np.ndarray:
    """Nonnegative unit-norm x with A x = lambda_max x.

    Disconnected input: computed on the largest component, 0 elsewhere.
    Power iteration runs on A + I to avoid oscillation on bipartite graphs.
    """
    if g.num_nodes == 0:
        raise InvalidParameters("empty graph")
    components = g.connected_components()
    comp = max(components, key=len)
    if len(comp) == 1:
        x = np.zeros(g.num_nodes)
        x[comp[0]] = 1.0
        return x
    comp_arr = np.array(sorted(comp), dtype=np.int64)
    local = {int(v): i for i, v in enumerate(comp_arr)}
    rows, cols = [], []
    for u in comp_arr:
        for v in g.neighbors(int(u)):
            rows.append(local[int(u)])
            cols.append(local[v])
    n = len(comp_arr)
    a = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    x = np.full(n, 1.0 / np.sqrt(n))
    for _ in range(max_iter):
        y = a @ x + x  # shifted iteration, same leading eigenvector
        y /= np.linalg.norm(y)
        lam = y @ (a @ y)
        if np.max(np.abs(a @ y - lam * y)) < tol:
            out = np.zeros(g.num_nodes)
            y = np.abs(y)  # Perron vector is entrywise nonnegative
            out[comp_arr] = y / np.linalg.norm(y)
            return out
        x = y
    raise ConvergenceError(f"eigenvector centrality: no convergence in {max_iter} iterations")


def pagerank(g: Graph, d: float = 0.85, tol: float = 1e-10,
             max_iter: int = _MAX_POWER_ITERS) -> np.ndarray:
    """PageRank with uniform teleport; entries sum to 1.

    Rank held by degree-0 nodes is redistributed uniformly each step.
    """
    if not 0.0 < d < 1.0:
        raise InvalidParameters(f"damping must be in (0,1), got {d}")
    n = g.num_nodes
    if n == 0:
        raise InvalidParameters("empty graph")
    a = g.adjacency_csr()
    deg = g.degrees().astype(np.float64)
    dangling = deg == 0
    inv_deg = np.where(dangling, 0.0, 1.0 / np.maximum(deg, 1.0))
    x = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        contrib = a @ (x * inv_deg)
        dangling_mass = x[dangling].sum()
        new = (1.0 - d) / n + d * (contrib + dangling_mass / n)
        if np.abs(new - x).sum() < tol:
            return new / new.sum()
        x = new
    raise ConvergenceError(f"pagerank: no convergence in {max_iter} iterations")


def transitivity(g: Graph) -> float:
    """3 * #triangles / #triads; 0 when the graph has no triads."""
    triads = 0
    triangles3 = 0  # triangles counted once per edge, i.e. 3x the count
    for v in range(g.num_nodes):
        deg = g.degree(v)
        triads += deg * (deg - 1) // 2
    for u, v in g.edges():
        triangles3 += _common_neighbor_count(g, u, v)
    if triads == 0:
        return 0.0
    return triangles3 / triads


def _common_neighbor_count(g: Graph, u: int, v: int) -> int:
    a, b = g.neighbors(u), g.neighbors(v)
    if len(a) > len(b):
        a, b = b, a
    i = j = count = 0
    while i < len(a) and j < len(b):
        if a[i] == b[j]:
            count += 1
            i += 1
            j += 1
        elif a[i] < b[j]:
            i += 1
        else:
            j += 1
    return count
