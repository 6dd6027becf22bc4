"""Normalized Laplacian and its eigendecomposition.

The dense symmetric solver is used throughout; matrices fed to it are
bounded by the combo-subgraph cap, keeping the cost cubic in that cap.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from .errors import EmptyGraphError, NonSymmetricInput
from .graphs import Graph

SYMMETRY_TOL = 1e-10


@dataclass(frozen=True)
class SpectralBasis:
    """Eigenpairs of a normalized Laplacian, eigenvalues ascending.

    eigenvalues: shape (n,), within [0, 2] up to roundoff.
    eigenvectors: shape (n, n), column p is the eigenvector of eigenvalue p.
    Arrays are treated as immutable.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dimension(self) -> int:
        return len(self.eigenvalues)


def normalized_laplacian(g: Graph) -> np.ndarray:
    """I - D^{-1/2} A D^{-1/2} as a dense array.

    Isolated nodes get a unit diagonal entry (their D^{-1/2} is taken as 0).
    """
    if g.num_nodes == 0:
        raise EmptyGraphError("normalized Laplacian of empty graph")
    adjacency = [g.neighbors(v) for v in range(g.num_nodes)]
    return laplacian_from_adjacency(adjacency)


def laplacian_from_adjacency(adjacency: Sequence[Sequence[int]]) -> np.ndarray:
    """Normalized Laplacian of an adjacency-list graph (local index space)."""
    n = len(adjacency)
    deg = np.array([len(nbrs) for nbrs in adjacency], dtype=np.float64)
    inv_sqrt = np.zeros(n)
    nz = deg > 0
    inv_sqrt[nz] = 1.0 / np.sqrt(deg[nz])
    lap = np.eye(n)
    for u, nbrs in enumerate(adjacency):
        if not len(nbrs):
            continue
        w = inv_sqrt[u] * inv_sqrt[list(nbrs)]
        lap[u, list(nbrs)] -= w
    return lap


def eigendecompose(lap: np.ndarray) -> SpectralBasis:
    """Eigendecomposition of a symmetric matrix, ascending eigenvalues."""
    lap = np.asarray(lap, dtype=np.float64)
    if lap.ndim != 2 or lap.shape[0] != lap.shape[1]:
        raise NonSymmetricInput(f"expected square matrix, got shape {lap.shape}")
    asym = np.max(np.abs(lap - lap.T)) if lap.size else 0.0
    if asym > SYMMETRY_TOL:
        raise NonSymmetricInput(f"asymmetry {asym:.3e} exceeds {SYMMETRY_TOL:.0e}")
    if lap.shape[0] == 1:
        return SpectralBasis(lap[0].copy(), np.ones((1, 1)))
    vals, vecs = sla.eigh(lap, driver="evd", check_finite=False)
    return SpectralBasis(vals, vecs)


# ---------------------------------------------------------------------------
# Optional sidecar cache, keyed by the edge-set content
# ---------------------------------------------------------------------------

def edge_set_key(num_nodes: int, edges: Sequence[tuple[int, int]]) -> str:
    h = hashlib.sha256()
    h.update(str(num_nodes).encode())
    for u, v in sorted((min(e), max(e)) for e in edges):
        h.update(f"{u},{v};".encode())
    return h.hexdigest()


def save_basis(basis: SpectralBasis, directory: Path, key: str) -> Path:
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"basis-{key}.npz"
    tmp = path.with_suffix(".tmp.npz")
    np.savez(tmp, eigenvalues=basis.eigenvalues, eigenvectors=basis.eigenvectors)
    tmp.replace(path)
    return path


def load_basis(directory: Path, key: str) -> SpectralBasis | None:
    path = directory / f"basis-{key}.npz"
    if not path.exists():
        return None
    with np.load(path) as data:
        return SpectralBasis(data["eigenvalues"].copy(), data["eigenvectors"].copy())
