"""Spectral kernels on combo-subgraphs.

Every kernel is a spectral filter: K[i, j] = s * sum_p rinv(lambda_p)
U[i, p] U[j, p], where rinv is the reciprocal of a nonnegative regularizer
of the Laplacian eigenvalues and s a signal-variance scale.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import InvalidParameters
from .spectral import SpectralBasis

VARIANTS = ("diffusion", "diffusion_ard", "polynomial", "sum_inverse_polynomial")

#: order of the polynomial-family regularizers: max(2, min(5, diameter))
MAX_ORDER = 5


def kernel_order(diameter: int) -> int:
    return max(2, min(MAX_ORDER, diameter))


@dataclass(frozen=True)
class KernelSpec:
    """Kernel variant plus hyperparameters.

    beta has length 1 for diffusion, the basis dimension for diffusion_ard,
    and order-1 slope coefficients for the polynomial family.  eps_offset is
    only used by the polynomial family.
    """

    variant: str
    beta: np.ndarray
    eps_offset: float = 0.0
    order: int = 2
    signal_variance: float = 1.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InvalidParameters(f"unknown kernel variant {self.variant!r}")
        beta = np.atleast_1d(np.asarray(self.beta, dtype=np.float64))
        object.__setattr__(self, "beta", beta)
        if np.any(beta < 0) or self.eps_offset < 0:
            raise InvalidParameters("beta and eps_offset must be nonnegative")
        if self.signal_variance <= 0:
            raise InvalidParameters("signal_variance must be positive")
        if self.variant in ("polynomial", "sum_inverse_polynomial"):
            if self.order < 2:
                raise InvalidParameters(f"order must be >= 2, got {self.order}")
            if len(beta) != self.order - 1:
                raise InvalidParameters(
                    f"{self.variant} needs order-1={self.order - 1} betas, got {len(beta)}"
                )
        elif self.variant == "diffusion" and len(beta) != 1:
            raise InvalidParameters("diffusion uses a single shared beta")

    def with_params(self, **kwargs) -> "KernelSpec":
        return replace(self, **kwargs)


def default_kernel(variant: str = "diffusion", dimension: int = 1, order: int = 2) -> KernelSpec:
    """Unit defaults: all beta 1, eps 1, unit signal variance."""
    if variant == "diffusion_ard":
        beta = np.ones(dimension)
    elif variant in ("polynomial", "sum_inverse_polynomial"):
        beta = np.ones(order - 1)
    else:
        beta = np.ones(1)
    return KernelSpec(variant=variant, beta=beta, eps_offset=1.0, order=order)


def regularizer_inverse(spec: KernelSpec, eigenvalues: np.ndarray) -> np.ndarray:
    """rinv(lambda_p) for every eigenvalue, per the kernel variant."""
    lam = np.asarray(eigenvalues, dtype=np.float64)
    if spec.variant == "diffusion":
        return np.exp(-spec.beta[0] * lam)
    if spec.variant == "diffusion_ard":
        if len(spec.beta) != len(lam):
            raise InvalidParameters(
                f"diffusion_ard needs one beta per eigenvalue ({len(lam)}), got {len(spec.beta)}"
            )
        return np.exp(-spec.beta * lam)
    powers = np.stack([lam ** j for j in range(1, spec.order)], axis=0)
    if spec.variant == "polynomial":
        r = spec.beta @ powers + spec.eps_offset
        return 1.0 / r
    # sum of inverse polynomials: rinv is itself the sum of reciprocals
    terms = spec.beta[:, None] * powers + spec.eps_offset
    return np.sum(1.0 / terms, axis=0)


def kernel_matrix(spec: KernelSpec, basis: SpectralBasis,
                  rows: Sequence[int] | np.ndarray,
                  cols: Sequence[int] | np.ndarray) -> np.ndarray:
    """Cross-covariance block between rows and cols (local indices)."""
    rinv = regularizer_inverse(spec, basis.eigenvalues)
    u = basis.eigenvectors
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    return spec.signal_variance * ((u[rows] * rinv) @ u[cols].T)


def kernel_diag(spec: KernelSpec, basis: SpectralBasis,
                rows: Sequence[int] | np.ndarray | None = None) -> np.ndarray:
    """Diagonal entries k(i, i), cheaper than a full block."""
    rinv = regularizer_inverse(spec, basis.eigenvalues)
    u = basis.eigenvectors if rows is None else basis.eigenvectors[np.asarray(rows)]
    return spec.signal_variance * ((u * u) @ rinv)
