"""Underlying functions over node (or edge) subsets.

All objectives are maximized; quantities the tasks minimize are negated at
construction.  Stochastic objectives are seeded: identical (subset, seed)
pairs give identical values, and callers control whether seeds are shared
(common random numbers) or per-evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np

from .centrality import pagerank, transitivity
from .combo import ComboNode
from .errors import InvalidParameters
from .graphs import Graph, line_graph
from .rng import derive_rng
from .spectral import SpectralBasis, eigendecompose, normalized_laplacian


@dataclass
class Objective:
    """A black-box subset function plus metadata the harness needs.

    node_scores is set for separable objectives (subset average of fixed
    per-node scores, already transformed so that f(S) = mean(node_scores[S]));
    search_graph/edge_map are set when the search space is a derived graph
    (edge-subset tasks run on the line graph).
    """

    fn: "callable"
    is_stochastic: bool = False
    name: str = ""
    node_scores: np.ndarray | None = None
    hidden_graph: bool = False
    search_graph: Graph | None = None
    edge_map: list[tuple[int, int]] | None = None

    def evaluate(self, subset: ComboNode, seed: int = 0) -> float:
        return float(self.fn(tuple(subset), seed))


# ---------------------------------------------------------------------------
# Separable node-score objectives
# ---------------------------------------------------------------------------

def avg_node_score(scores: np.ndarray, name: str = "avg_node_score") -> Objective:
    """f(S) = mean of per-node scores inside the subset."""
    scores = np.asarray(scores, dtype=np.float64)

    def fn(subset: ComboNode, seed: int) -> float:
        return float(scores[list(subset)].mean())

    return Objective(fn=fn, name=name, node_scores=scores)


def ackley(x: float | np.ndarray, y: float | np.ndarray):
    """Two-dimensional Ackley test function (global minimum 0 at origin)."""
    term1 = -20.0 * np.exp(-0.2 * np.sqrt(0.5 * (x**2 + y**2)))
    term2 = -np.exp(0.5 * (np.cos(2 * np.pi * x) + np.cos(2 * np.pi * y)))
    return term1 + term2 + 20.0 + math.e


def ackley_grid_scores(rows: int, cols: int, noise_sigma: float = 0.5,
                       seed: int = 0) -> np.ndarray:
    """Negated Ackley sampled on a rows x cols grid mapped onto [-5, 5]^2,
    with frozen per-node Gaussian corruption.

    Scores are per grid node (row-major); the global maximum sits at the
    interior node closest to the origin (exactly the center for odd dims).
    """
    if rows < 1 or cols < 1:
        raise InvalidParameters("grid dims must be >= 1")
    xs = np.zeros(rows) if rows == 1 else -5.0 + 10.0 * np.arange(rows) / (rows - 1)
    ys = np.zeros(cols) if cols == 1 else -5.0 + 10.0 * np.arange(cols) / (cols - 1)
    grid_x, grid_y = np.meshgrid(xs, ys, indexing="ij")
    values = ackley(grid_x, grid_y)
    if noise_sigma > 0:
        values = values + noise_sigma * derive_rng(seed, "ackley-noise").standard_normal(values.shape)
    return (-values).reshape(-1)


def eigenvector_signal_objective(g: Graph, j: int, k: int,
                                 standardize: bool = True) -> Objective:
    """Subset average of the j-th Laplacian eigenvector (1-based, ascending
    eigenvalues), standardized to zero mean / unit variance over uniform
    k-subsets.

    Sign convention: the first entry above 1e-8 in magnitude is positive.
    """
    basis = eigendecompose(normalized_laplacian(g))
    if not 1 <= j <= basis.dimension:
        raise InvalidParameters(f"eigenvector index {j} outside 1..{basis.dimension}")
    signal = basis.eigenvectors[:, j - 1].copy()
    for entry in signal:
        if abs(entry) > 1e-8:
            if entry < 0:
                signal = -signal
            break
    scores = standardize_subset_scores(signal, k) if standardize else signal
    return avg_node_score(scores, name=f"eigenvector_signal_j{j}")


def standardize_subset_scores(node_scores: np.ndarray, k: int) -> np.ndarray:
    """Affine per-node transform making the subset-average signal have mean 0
    and variance 1 under uniform k-subsets drawn without replacement."""
    node_scores = np.asarray(node_scores, dtype=np.float64)
    n = len(node_scores)
    if not 1 <= k <= n:
        raise InvalidParameters(f"k={k} invalid for {n} node scores")
    mu = node_scores.mean()
    sigma = node_scores.std()
    if sigma < 1e-15:
        return node_scores - mu
    if k == n:
        return node_scores - mu  # single subset; variance undefined
    tau = sigma * math.sqrt((n - k) / (k * (n - 1.0)))
    return (node_scores - mu) / tau


def standardized_pagerank_objective(g: Graph, k: int, noise_sigma: float = 0.0) -> Objective:
    """Scaled subset sum of z-scored PageRank, optionally with seeded
    per-evaluation Gaussian observation noise."""
    if noise_sigma < 0:
        raise InvalidParameters("noise_sigma must be >= 0")
    scores = pagerank(g)
    z = (scores - scores.mean()) / scores.std()
    per_node = math.sqrt(k) * z  # f(S) = sum(z) / sqrt(k) = mean(per_node[S])

    def fn(subset: ComboNode, seed: int) -> float:
        clean = float(per_node[list(subset)].mean())
        if noise_sigma == 0:
            return clean
        return clean + noise_sigma * float(derive_rng(seed, "obs-noise").standard_normal())

    return Objective(fn=fn, is_stochastic=noise_sigma > 0,
                     name=f"standardized_pagerank_sigma{noise_sigma}",
                     node_scores=per_node)


def with_observation_noise(objective: Objective, sigma: float) -> Objective:
    """Wrap an objective with seeded additive Gaussian observation noise."""
    if sigma < 0:
        raise InvalidParameters("sigma must be >= 0")
    if sigma == 0:
        return objective

    def fn(subset: ComboNode, seed: int) -> float:
        clean = objective.fn(subset, seed)
        return clean + sigma * float(derive_rng(seed, "obs-noise").standard_normal())

    return Objective(fn=fn, is_stochastic=True, name=f"{objective.name}+noise{sigma}",
                     node_scores=objective.node_scores,
                     hidden_graph=objective.hidden_graph,
                     search_graph=objective.search_graph,
                     edge_map=objective.edge_map)


# ---------------------------------------------------------------------------
# Edge-subset objective via the line graph
# ---------------------------------------------------------------------------

def transitivity_drop_objective(g: Graph) -> Objective:
    """Drop in global transitivity caused by deleting an edge subset.

    The subset ids are line-graph node ids; the attached search_graph and
    edge_map let the harness run node-subset machinery on edge tasks.
    """
    search_graph, edge_map = line_graph(g)
    base_transitivity = transitivity(g)
    degrees = g.degrees()
    neighbor_sets = [set(g.neighbors(v)) for v in range(g.num_nodes)]
    base_triangles3 = sum(
        len(neighbor_sets[u] & neighbor_sets[v]) for u, v in g.edges()
    )  # 3x the triangle count

    def triangles_touching(edges: list[tuple[int, int]]) -> int:
        # inclusion-exclusion over "triangle contains removed edge e";
        # a triangle has 3 edges, so the expansion stops at triples
        total = 0
        m = len(edges)
        for u, v in edges:
            total += len(neighbor_sets[u] & neighbor_sets[v])
        for i in range(m):
            for j in range(i + 1, m):
                shared = set(edges[i]) & set(edges[j])
                if len(shared) != 1:
                    continue
                x = shared.pop()
                a = edges[i][0] if edges[i][1] == x else edges[i][1]
                b = edges[j][0] if edges[j][1] == x else edges[j][1]
                if b in neighbor_sets[a]:
                    total -= 1
        for i in range(m):
            for j in range(i + 1, m):
                for l in range(j + 1, m):
                    verts = set(edges[i]) | set(edges[j]) | set(edges[l])
                    if len(verts) == 3:
                        total += 1
        return total

    def fn(subset: ComboNode, seed: int) -> float:
        edges = [edge_map[i] for i in subset]
        lost = triangles_touching(edges)
        removals = np.zeros(g.num_nodes, dtype=np.int64)
        for u, v in edges:
            removals[u] += 1
            removals[v] += 1
        new_deg = degrees - removals
        new_triads = int(np.sum(new_deg * (new_deg - 1) // 2))
        new_triangles3 = base_triangles3 - 3 * lost
        new_transitivity = 0.0 if new_triads == 0 else new_triangles3 / new_triads
        return base_transitivity - new_transitivity

    return Objective(fn=fn, name="transitivity_drop",
                     search_graph=search_graph, edge_map=edge_map)


# ---------------------------------------------------------------------------
# Spectral-signal analysis helpers
# ---------------------------------------------------------------------------

def smoothness_energy(basis: SpectralBasis, signal: np.ndarray) -> np.ndarray:
    """Cumulative energy of the graph Fourier coefficients of the signal.

    Nondecreasing curve ending at 1; an early rise marks a smooth signal.
    """
    signal = np.asarray(signal, dtype=np.float64)
    if len(signal) != basis.dimension:
        raise InvalidParameters(
            f"signal length {len(signal)} != basis dimension {basis.dimension}")
    coeffs = basis.eigenvectors.T @ signal
    energy = coeffs**2
    total = energy.sum()
    if total <= 0:
        return np.ones_like(energy)
    return np.cumsum(energy) / total


# ---------------------------------------------------------------------------
# Ground truth
# ---------------------------------------------------------------------------

def ground_truth(objective: Objective, k: int, graph: Graph | None = None,
                 cap: int = 200_000) -> float | None:
    """Exact optimum: top-k score mean for separable objectives, exhaustive
    max for brute-forceable deterministic ones, None otherwise."""
    if objective.node_scores is not None:
        scores = np.sort(np.asarray(objective.node_scores, dtype=np.float64))
        if k > len(scores):
            raise InvalidParameters(f"k={k} exceeds score vector length {len(scores)}")
        return float(scores[-k:].mean())
    if objective.is_stochastic:
        return None
    search = objective.search_graph if objective.search_graph is not None else graph
    if search is None:
        return None
    n = search.num_nodes
    if k > n or comb(n, k) > cap:
        return None
    best = -math.inf
    for subset in combinations(range(n), k):
        best = max(best, objective.evaluate(subset, 0))
    return best


def argmax_subset(objective: Objective, k: int, graph: Graph | None = None,
                  cap: int = 200_000) -> tuple[ComboNode, float] | None:
    """Optimal subset alongside its value, when computable."""
    if objective.node_scores is not None:
        scores = np.asarray(objective.node_scores, dtype=np.float64)
        order = np.argsort(scores, kind="stable")
        top = tuple(sorted(int(v) for v in order[-k:]))
        return top, float(scores[list(top)].mean())
    if objective.is_stochastic:
        return None
    search = objective.search_graph if objective.search_graph is not None else graph
    if search is None or k > search.num_nodes or comb(search.num_nodes, k) > cap:
        return None
    best, best_subset = -math.inf, None
    for subset in combinations(range(search.num_nodes), k):
        value = objective.evaluate(subset, 0)
        if value > best:
            best, best_subset = value, subset
    return best_subset, best
