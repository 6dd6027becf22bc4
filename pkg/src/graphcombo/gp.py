"""Gaussian-process surrogate on a combo-subgraph spectral basis.

Observations are standardized per training set; the prior mean is 0 in
standardized space.  Factorizations use a jitter ladder (1e-8 escalating
x10 up to 1e-2 on the Gram diagonal) and fail loudly beyond that.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg as sla
from scipy.optimize import minimize

from .errors import FactorizationError, InvalidParameters
from .kernels import (KernelSpec, default_kernel, kernel_diag, kernel_matrix,
                      regularizer_inverse)
from .spectral import SpectralBasis

JITTER_START = 1e-8
JITTER_MAX = 1e-2

#: log-space fit box
BETA_BOUNDS = (1e-4, 1e2)
EPS_BOUNDS = (1e-4, 1e2)
SIGNAL_BOUNDS = (1e-6, 1e3)
NOISE_BOUNDS = (1e-8, 1.0)

DEFAULT_NOISE = 1e-6


@dataclass
class GPModel:
    """Training state of the surrogate on one spectral basis.

    noise_variance is expressed in standardized-observation units.
    """

    basis: SpectralBasis
    train_indices: np.ndarray
    train_y: np.ndarray
    kernel: KernelSpec
    noise_variance: float = DEFAULT_NOISE
    fit_failed: bool = False
    y_mean: float = field(init=False, default=0.0)
    y_std: float = field(init=False, default=1.0)

    def __post_init__(self):
        self.train_indices = np.asarray(self.train_indices, dtype=np.int64)
        self.train_y = np.asarray(self.train_y, dtype=np.float64)
        if len(self.train_indices) != len(self.train_y):
            raise InvalidParameters("train_indices and train_y length mismatch")
        if len(set(self.train_indices.tolist())) != len(self.train_indices):
            raise InvalidParameters("duplicate training indices")
        if len(self.train_indices) and (
            self.train_indices.min() < 0
            or self.train_indices.max() >= self.basis.dimension
        ):
            raise InvalidParameters("training index outside basis dimension")
        self.y_mean = float(self.train_y.mean()) if len(self.train_y) else 0.0
        std = float(self.train_y.std()) if len(self.train_y) else 1.0
        self.y_std = std if std > 1e-12 else 1.0

    @property
    def standardized_y(self) -> np.ndarray:
        return (self.train_y - self.y_mean) / self.y_std


def cholesky_with_jitter(gram: np.ndarray) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor, escalating diagonal jitter on failure."""
    try:
        return sla.cholesky(gram, lower=True, check_finite=False), 0.0
    except np.linalg.LinAlgError:
        pass

    jitter = JITTER_START
    eye = np.eye(gram.shape[0])
    while jitter <= JITTER_MAX:
        try:
            return sla.cholesky(gram + jitter * eye, lower=True, check_finite=False), jitter
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise FactorizationError(
        f"Cholesky failed with jitter up to {JITTER_MAX:.0e} on {gram.shape[0]}x{gram.shape[0]} Gram"
    )


def posterior(model: GPModel, query: np.ndarray | list[int]) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and variance at the queried local indices.

    Outputs are de-standardized; variances are clamped at 0.
    """
    if len(model.train_indices) < 1:
        raise InvalidParameters("posterior needs at least one training point")
    query = np.asarray(query, dtype=np.int64)
    x = model.train_indices
    gram = kernel_matrix(model.kernel, model.basis, x, x)
    gram[np.diag_indices_from(gram)] += model.noise_variance
    chol, _ = cholesky_with_jitter(gram)
    y_std = model.standardized_y
    alpha = sla.solve_triangular(chol, y_std, lower=True, check_finite=False)
    cross = kernel_matrix(model.kernel, model.basis, x, query)
    a = sla.solve_triangular(chol, cross, lower=True, check_finite=False)
    mean_std = a.T @ alpha
    var_std = kernel_diag(model.kernel, model.basis, query) - np.sum(a * a, axis=0)
    var_std = np.maximum(var_std, 0.0)
    return mean_std * model.y_std + model.y_mean, var_std * model.y_std**2


def log_marginal_likelihood(model: GPModel) -> float:
    """Gaussian log evidence of the standardized observations."""
    if len(model.train_indices) < 1:
        raise InvalidParameters("needs at least one training point")
    x = model.train_indices
    gram = kernel_matrix(model.kernel, model.basis, x, x)
    gram[np.diag_indices_from(gram)] += model.noise_variance
    chol, _ = cholesky_with_jitter(gram)
    y = model.standardized_y
    alpha = sla.solve_triangular(chol, y, lower=True, check_finite=False)
    t = len(y)
    return float(-0.5 * alpha @ alpha - np.log(np.diag(chol)).sum() - 0.5 * t * np.log(2 * np.pi))


# ---------------------------------------------------------------------------
# Maximum-likelihood hyperparameter fitting
# ---------------------------------------------------------------------------

def _pack_bounds(spec: KernelSpec) -> list[tuple[float, float]]:
    bounds = [tuple(np.log(BETA_BOUNDS))] * len(spec.beta)
    if spec.variant in ("polynomial", "sum_inverse_polynomial"):
        bounds.append(tuple(np.log(EPS_BOUNDS)))
    bounds.append(tuple(np.log(SIGNAL_BOUNDS)))
    bounds.append(tuple(np.log(NOISE_BOUNDS)))
    return bounds


def _pack(spec: KernelSpec, noise: float) -> np.ndarray:
    parts = [np.log(np.clip(spec.beta, *BETA_BOUNDS))]
    if spec.variant in ("polynomial", "sum_inverse_polynomial"):
        parts.append([np.log(np.clip(spec.eps_offset, *EPS_BOUNDS))])
    parts.append([np.log(np.clip(spec.signal_variance, *SIGNAL_BOUNDS))])
    parts.append([np.log(np.clip(noise, *NOISE_BOUNDS))])
    return np.concatenate([np.atleast_1d(p) for p in parts])


def _unpack(theta: np.ndarray, spec: KernelSpec) -> tuple[KernelSpec, float]:
    nb = len(spec.beta)
    beta = np.exp(theta[:nb])
    pos = nb
    eps = spec.eps_offset
    if spec.variant in ("polynomial", "sum_inverse_polynomial"):
        eps = float(np.exp(theta[pos]))
        pos += 1
    signal = float(np.exp(theta[pos]))
    noise = float(np.exp(theta[pos + 1]))
    return spec.with_params(beta=beta, eps_offset=eps, signal_variance=signal), noise


def _lml_function(basis: SpectralBasis, train_indices: np.ndarray, y_standardized: np.ndarray,
                  template: KernelSpec):
    """Closure evaluating -LML(theta); reuses the sliced eigenvector rows."""
    u_train = basis.eigenvectors[train_indices]
    t = len(train_indices)
    log2pi = np.log(2 * np.pi)

    def neg_lml(theta: np.ndarray) -> float:
        spec, noise = _unpack(theta, template)
        try:
            rinv = regularizer_inverse(spec, basis.eigenvalues)
            gram = spec.signal_variance * ((u_train * rinv) @ u_train.T)
            gram[np.diag_indices_from(gram)] += noise
            chol, _ = cholesky_with_jitter(gram)
        except (FactorizationError, FloatingPointError):
            return 1e12
        alpha = sla.solve_triangular(chol, y_standardized, lower=True, check_finite=False)
        lml = -0.5 * alpha @ alpha - np.log(np.diag(chol)).sum() - 0.5 * t * log2pi
        if not np.isfinite(lml):
            return 1e12
        return float(-lml)

    return neg_lml


def fit_hyperparameters(model: GPModel, restarts: int = 5,
                        rng: np.random.Generator | None = None,
                        maxfun: int = 80) -> GPModel:
    """Multi-start bounded maximum-likelihood fit in log-parameter space.

    With fewer than 2 training points, fitting is skipped and unit defaults
    are returned.  If every start fails, defaults are returned with
    fit_failed set.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    template = model.kernel
    if len(model.train_indices) < 2:
        defaults = default_kernel(template.variant, model.basis.dimension, template.order)
        return replace(model, kernel=defaults, noise_variance=DEFAULT_NOISE, fit_failed=False)

    neg_lml = _lml_function(model.basis, model.train_indices, model.standardized_y, template)
    bounds = _pack_bounds(template)
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])

    starts = [_pack(template, model.noise_variance)]
    for _ in range(max(0, restarts - 1)):
        starts.append(lo + rng.random(len(bounds)) * (hi - lo))

    best_theta = None
    best_value = np.inf
    any_success = False
    for theta0 in starts:
        f0 = neg_lml(theta0)
        if f0 < best_value:
            best_value, best_theta = f0, theta0
        if f0 < 1e12:
            any_success = True
        result = minimize(neg_lml, theta0, method="L-BFGS-B", bounds=bounds,
                          options={"maxfun": maxfun})
        if np.isfinite(result.fun) and result.fun < best_value:
            best_value, best_theta = result.fun, result.x
            any_success = True

    if not any_success or best_theta is None:
        defaults = default_kernel(template.variant, model.basis.dimension, template.order)
        return replace(model, kernel=defaults, noise_variance=DEFAULT_NOISE, fit_failed=True)
    spec, noise = _unpack(np.asarray(best_theta), template)
    return replace(model, kernel=spec, noise_variance=noise, fit_failed=False)


# ---------------------------------------------------------------------------
# Incremental surrogate used by the search loop
# ---------------------------------------------------------------------------

class SubgraphSurrogate:
    """Posterior state over one combo-subgraph, updated one query at a time.

    Caches the train-to-everything cross-covariance, its triangular solve,
    and the Cholesky factor; adding a training point costs O(t*n) and a
    posterior over the whole subgraph costs O(t^2 + t*n).  Caches are
    rebuilt only when hyperparameters change.
    """

    def __init__(self, basis: SpectralBasis, kernel: KernelSpec,
                 noise_variance: float = DEFAULT_NOISE):
        self.basis = basis
        self.kernel = kernel
        self.noise_variance = noise_variance
        self.indices: list[int] = []
        self.values: list[float] = []
        self.fit_failed = False
        self._u_squared = basis.eigenvectors * basis.eigenvectors
        self._refresh_kernel_caches()
        self._rebuild_training_caches()

    # -- cache management ---------------------------------------------------

    def _refresh_kernel_caches(self) -> None:
        self._rinv = regularizer_inverse(self.kernel, self.basis.eigenvalues)
        self._prior_diag = self.kernel.signal_variance * (self._u_squared @ self._rinv)

    def _cross_rows(self, indices) -> np.ndarray:
        u = self.basis.eigenvectors
        idx = np.asarray(indices, dtype=np.int64)
        return self.kernel.signal_variance * ((u[idx] * self._rinv) @ u.T)

    def _rebuild_training_caches(self) -> None:
        n = self.basis.dimension
        t = len(self.indices)
        if t == 0:
            self._cross = np.empty((0, n))
            self._chol = np.empty((0, 0))
            self._a = np.empty((0, n))
            self._a_sq = np.zeros(n)
            self._jitter = 0.0
            return
        idx = np.asarray(self.indices, dtype=np.int64)
        self._cross = self._cross_rows(idx)
        gram = self._cross[:, idx]
        gram = 0.5 * (gram + gram.T)  # slicing roundoff
        gram[np.diag_indices_from(gram)] += self.noise_variance
        self._chol, self._jitter = cholesky_with_jitter(gram)
        self._a = sla.solve_triangular(self._chol, self._cross, lower=True,
                                       check_finite=False)
        self._a_sq = np.sum(self._a * self._a, axis=0)

    # -- public surface -----------------------------------------------------

    def set_training(self, indices: list[int], values: list[float]) -> None:
        self.indices = list(indices)
        self.values = list(values)
        self._rebuild_training_caches()

    def add_point(self, index: int, value: float) -> None:
        old_t = len(self.indices)
        self.indices.append(index)
        self.values.append(value)
        if old_t == 0:
            self._rebuild_training_caches()
            return
        row = self._cross_rows([index])[0]
        k_vec = self._cross[:, index]
        k_nn = self._prior_diag[index] + self.noise_variance + self._jitter
        c_vec = sla.solve_triangular(self._chol, k_vec, lower=True, check_finite=False)
        c_nn_sq = k_nn - c_vec @ c_vec
        if c_nn_sq <= 1e-12:
            # numerically degenerate extension: rebuild with the jitter ladder
            self._rebuild_training_caches()
            return
        c_nn = np.sqrt(c_nn_sq)
        chol = np.zeros((old_t + 1, old_t + 1))
        chol[:old_t, :old_t] = self._chol
        chol[old_t, :old_t] = c_vec
        chol[old_t, old_t] = c_nn
        self._chol = chol
        a_row = (row - c_vec @ self._a) / c_nn
        self._cross = np.vstack([self._cross, row[None, :]])
        self._a = np.vstack([self._a, a_row[None, :]])
        self._a_sq = self._a_sq + a_row * a_row

    def refit(self, restarts: int, rng: np.random.Generator, maxfun: int = 60) -> None:
        model = self.as_model()
        fitted = fit_hyperparameters(model, restarts=restarts, rng=rng, maxfun=maxfun)
        self.kernel = fitted.kernel
        self.noise_variance = fitted.noise_variance
        self.fit_failed = fitted.fit_failed
        self._refresh_kernel_caches()
        self._rebuild_training_caches()

    def as_model(self) -> GPModel:
        return GPModel(
            basis=self.basis,
            train_indices=np.asarray(self.indices, dtype=np.int64),
            train_y=np.asarray(self.values, dtype=np.float64),
            kernel=self.kernel,
            noise_variance=self.noise_variance,
        )

    def posterior_all(self) -> tuple[np.ndarray, np.ndarray]:
        """Posterior mean/variance over every combo-node in the subgraph."""
        t = len(self.indices)
        if t == 0:
            raise InvalidParameters("posterior needs at least one training point")
        y = np.asarray(self.values, dtype=np.float64)
        y_mean = float(y.mean())
        std = float(y.std())
        y_std = std if std > 1e-12 else 1.0
        y_hat = (y - y_mean) / y_std
        beta = sla.solve_triangular(self._chol, y_hat, lower=True, check_finite=False)
        mean_std = self._a.T @ beta
        var_std = np.maximum(self._prior_diag - self._a_sq, 0.0)
        return mean_std * y_std + y_mean, var_std * y_std**2

    def hyperparameter_row(self) -> dict:
        """Compact hyperparameter snapshot for run records."""
        beta = self.kernel.beta
        row = {
            "kernel": self.kernel.variant,
            "beta": float(beta[0]) if len(beta) == 1 else [float(b) for b in beta[:8]],
            "signal_variance": float(self.kernel.signal_variance),
            "noise_variance": float(self.noise_variance),
        }
        if self.kernel.variant in ("polynomial", "sum_inverse_polynomial"):
            row["eps_offset"] = float(self.kernel.eps_offset)
        return row
