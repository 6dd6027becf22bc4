"""Kernel-validation and signal-smoothness protocols on enumerated combo-graphs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .combo import adjacency_from_edges, brute_force_combo_graph
from .errors import InvalidParameters
from .gp import GPModel, fit_hyperparameters, posterior
from .graphs import Graph
from .kernels import VARIANTS, default_kernel, kernel_order
from .objectives import eigenvector_signal_objective
from .rng import derive_rng
from .spectral import SpectralBasis, eigendecompose, laplacian_from_adjacency


def spearman_rho(a, b) -> float:
    """Rank correlation (Pearson on average ranks)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise InvalidParameters(f"need equal-length vectors, got {a.shape} vs {b.shape}")
    if len(a) < 2:
        raise InvalidParameters("need at least 2 entries")
    if a.std() == 0 or b.std() == 0:
        raise InvalidParameters("zero-variance input: rank correlation undefined")
    return float(stats.spearmanr(a, b).statistic)


@dataclass
class ComboGraphFixture:
    """Fully enumerated combo-graph with its spectral basis."""

    graph: Graph
    k: int
    nodes: list[tuple[int, ...]]
    adjacency: list[list[int]]
    basis: SpectralBasis
    diameter_clamped: int  # exact up to the kernel-order clamp of 5


def enumerate_combo_fixture(graph: Graph, k: int, cap: int = 200_000) -> ComboGraphFixture:
    nodes, edges = brute_force_combo_graph(graph, k, cap=cap)
    adjacency = adjacency_from_edges(len(nodes), edges)
    basis = eigendecompose(laplacian_from_adjacency(adjacency))
    diameter = _diameter_upto(adjacency, clamp=5)
    return ComboGraphFixture(graph=graph, k=k, nodes=nodes, adjacency=adjacency,
                             basis=basis, diameter_clamped=diameter)


def _diameter_upto(adjacency, clamp: int) -> int:
    """Exact diameter unless it provably exceeds clamp (then clamp)."""
    from .combo import _bfs_adjacency

    n = len(adjacency)
    if n <= 1:
        return 0
    d0 = _bfs_adjacency(adjacency, 0)
    far = max(range(n), key=lambda i: d0[i])
    bound = max(_bfs_adjacency(adjacency, far))
    if bound >= clamp:
        return clamp
    best = bound
    for s in range(n):
        best = max(best, max(_bfs_adjacency(adjacency, s)))
        if best >= clamp:
            return clamp
    return best


def combo_signal(fixture: ComboGraphFixture, signal_j: int,
                 standardized: bool = True) -> np.ndarray:
    """Subset-average of the original graph's j-th eigenvector over every
    combo-node, z-scored over the enumeration when standardized."""
    objective = eigenvector_signal_objective(fixture.graph, signal_j, fixture.k,
                                             standardize=False)
    values = np.array([objective.evaluate(node) for node in fixture.nodes])
    if not standardized:
        return values
    std = values.std()
    if std < 1e-15:
        return values - values.mean()
    return (values - values.mean()) / std


@dataclass
class KernelValidationResult:
    kernel: str
    rhos: np.ndarray  # one per seed

    @property
    def mean(self) -> float:
        return float(self.rhos.mean())

    @property
    def stderr(self) -> float:
        if len(self.rhos) < 2:
            return 0.0
        return float(self.rhos.std(ddof=1) / np.sqrt(len(self.rhos)))


def kernel_validation(graph_factory, k: int, kernels=VARIANTS, n_seeds: int = 20,
                      train_fraction: float = 0.25, signal_j: int = 3,
                      noise_sigma: float = 0.0, pure_noise_signal: bool = False,
                      base_seed: int = 0, fit_restarts: int = 2,
                      fit_maxfun: int = 40, cap: int = 200_000
                      ) -> list[KernelValidationResult]:
    """Fit each kernel on a train split of the enumerated combo-graph signal
    and score posterior-mean rank correlation on the held-out split.

    graph_factory(seed) must return the underlying Graph for that replicate.
    noise_sigma corrupts the training observations only; pure_noise_signal
    replaces the signal entirely (the no-structure null).
    """
    if not 0 < train_fraction < 1:
        raise InvalidParameters("train_fraction must be in (0,1)")
    rhos = {kernel: [] for kernel in kernels}
    for i in range(n_seeds):
        rng = derive_rng(base_seed, "kernel-validation", i)
        fixture = enumerate_combo_fixture(graph_factory(base_seed + i), k, cap=cap)
        n = len(fixture.nodes)
        if pure_noise_signal:
            signal = rng.standard_normal(n)
        else:
            signal = combo_signal(fixture, signal_j)
        perm = rng.permutation(n)
        n_train = max(2, int(round(train_fraction * n)))
        train_idx = np.sort(perm[:n_train])
        test_idx = np.sort(perm[n_train:])
        train_y = signal[train_idx].copy()
        if noise_sigma > 0:
            train_y = train_y + noise_sigma * rng.standard_normal(n_train)
        order = kernel_order(fixture.diameter_clamped)
        for kernel_name in kernels:
            spec = default_kernel(kernel_name, fixture.basis.dimension, order)
            model = GPModel(basis=fixture.basis, train_indices=train_idx,
                            train_y=train_y, kernel=spec)
            fitted = fit_hyperparameters(model, restarts=fit_restarts,
                                         rng=derive_rng(base_seed, "fit", i, kernel_name),
                                         maxfun=fit_maxfun)
            pred_mean, _ = posterior(fitted, test_idx)
            rhos[kernel_name].append(spearman_rho(pred_mean, signal[test_idx]))
    return [KernelValidationResult(kernel=name, rhos=np.array(values))
            for name, values in rhos.items()]


def smoothness_curves(graph_factory, k: int, j_values=(2, 4, 8, 12, 16),
                      n_seeds: int = 50, base_seed: int = 0,
                      cap: int = 200_000) -> dict[int, dict[str, np.ndarray]]:
    """Cumulative graph-Fourier energy of combo-space signals built from
    eigenvectors of increasing frequency, averaged over seeded replicates.

    Returns {j: {"mean": curve, "stderr": curve}}.
    """
    from .objectives import smoothness_energy

    curves: dict[int, list[np.ndarray]] = {int(j): [] for j in j_values}
    for i in range(n_seeds):
        fixture = enumerate_combo_fixture(graph_factory(base_seed + i), k, cap=cap)
        trivial = fixture.basis.eigenvectors[:, 0]
        for j in j_values:
            signal = combo_signal(fixture, int(j))
            # drop the trivial-component energy so curves compare how the
            # informative frequencies are distributed
            signal = signal - (trivial @ signal) * trivial
            curves[int(j)].append(smoothness_energy(fixture.basis, signal))
    out: dict[int, dict[str, np.ndarray]] = {}
    for j, stack in curves.items():
        arr = np.vstack(stack)
        stderr = (arr.std(ddof=1, axis=0) / np.sqrt(len(stack))
                  if len(stack) > 1 else np.zeros(arr.shape[1]))
        out[j] = {"mean": arr.mean(axis=0), "stderr": stderr}
    return out
