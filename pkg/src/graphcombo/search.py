"""Expected Improvement acquisition and the combo-graph BO loop.

The loop keeps a trust region (the sampled combo-subgraph) centered at the
best training combo-node, refits the surrogate whenever the region is
resampled, queries the EI argmax among unqueried members, and recenters on
strict improvement.  failtol consecutive non-improvements (or exhausting
the region) trigger a restart that resets the training pool while the
global query history persists.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import ndtr

from .combo import ComboNode, combo_node, sample_combo_subgraph, set_difference_distance
from .errors import ExhaustedSubgraph, InvalidParameters
from .gp import GPModel, SubgraphSurrogate, posterior
from .graphs import NeighborOracle
from .kernels import default_kernel, kernel_order
from .records import RunRecord, RunRow
from .rng import derive_rng, derive_seed

RESTART_METHODS = ("random", "best_queried", "initial")
INIT_METHODS = ("none", "random_walk", "uniform_random")

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class RunConfig:
    """Knobs of one optimization run (shared by all methods)."""

    k: int
    T: int = 300
    Q: int = 4000
    failtol: int = 30
    l_max: float = math.inf
    restart_method: str = "best_queried"
    init_method: str = "none"
    n_init: int = 0
    noisy_variant: bool = False
    seed: int = 0
    kernel: str = "diffusion"
    fit_restarts: int = 2
    fit_maxfun: int = 60
    refit_every: int = 0  # 0: refit only when the subgraph is resampled

    def __post_init__(self):
        problems = []
        if self.k < 1:
            problems.append(f"k must be >= 1, got {self.k}")
        if self.T < 1:
            problems.append(f"T must be >= 1, got {self.T}")
        if self.Q < 1:
            problems.append(f"Q must be >= 1, got {self.Q}")
        if self.failtol < 1:
            problems.append(f"failtol must be >= 1, got {self.failtol}")
        if self.l_max < 1:
            problems.append(f"l_max must be >= 1, got {self.l_max}")
        if self.restart_method not in RESTART_METHODS:
            problems.append(f"restart_method must be one of {RESTART_METHODS}")
        if self.init_method not in INIT_METHODS:
            problems.append(f"init_method must be one of {INIT_METHODS}")
        if self.init_method != "none" and self.n_init < 1:
            problems.append("n_init must be >= 1 for query-based initialization")
        if problems:
            raise InvalidParameters("; ".join(problems))


# ---------------------------------------------------------------------------
# Acquisition
# ---------------------------------------------------------------------------

def expected_improvement(mean, variance, best):
    """Closed-form EI for maximization; max(mean-best, 0) at zero variance."""
    mean = np.asarray(mean, dtype=np.float64)
    variance = np.asarray(variance, dtype=np.float64)
    if np.any(variance < 0):
        raise InvalidParameters("variance must be nonnegative")
    sigma = np.sqrt(variance)
    improvement = mean - best
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(sigma > 0, improvement / np.where(sigma > 0, sigma, 1.0), 0.0)
    phi = _INV_SQRT_2PI * np.exp(-0.5 * z * z)
    ei = np.where(sigma > 0, sigma * (z * ndtr(z) + phi), np.maximum(improvement, 0.0))
    if ei.ndim == 0:
        return float(ei)
    return ei


def select_next(model: GPModel, subgraph, queried: set[int]) -> int:
    """EI argmax over unqueried local indices; ties go to the lowest index."""
    candidates = [i for i in range(subgraph.size) if i not in queried]
    if not candidates:
        raise ExhaustedSubgraph("all combo-nodes in the subgraph are queried")
    best = float(np.max(model.train_y)) if len(model.train_y) else 0.0
    mean, var = posterior(model, candidates)
    scores = expected_improvement(mean, var, best)
    return candidates[int(np.argmax(scores))]


def _argmax_ei(mean: np.ndarray, var: np.ndarray, best: float,
               candidates: list[int]) -> int:
    scores = expected_improvement(mean[candidates], var[candidates], best)
    return candidates[int(np.argmax(scores))]


# ---------------------------------------------------------------------------
# Initialization and restarts
# ---------------------------------------------------------------------------

def _uniform_subset(k: int, pool: list[int], rng: np.random.Generator) -> ComboNode:
    if len(pool) < k:
        raise InvalidParameters(f"cannot draw {k} distinct nodes from pool of {len(pool)}")
    picked = rng.choice(np.asarray(pool, dtype=np.int64), size=k, replace=False)
    return tuple(sorted(int(v) for v in picked))


def _resolve_collisions(positions: list[int], universe: int, rng: np.random.Generator,
                        restep=None, max_retries: int = 20) -> list[int]:
    """Make walker positions distinct: colliding walkers re-step, then any
    remaining duplicates are filled uniformly from unused node ids."""
    for _ in range(max_retries):
        seen: set[int] = set()
        collided = []
        for i, pos in enumerate(positions):
            if pos in seen:
                collided.append(i)
            else:
                seen.add(pos)
        if not collided:
            return positions
        if restep is None:
            break
        for i in collided:
            positions[i] = restep(i)
    seen = set()
    for i, pos in enumerate(positions):
        if pos not in seen:
            seen.add(pos)
            continue
        while True:
            fill = int(rng.integers(0, universe))
            if fill not in seen:
                positions[i] = fill
                seen.add(fill)
                break
    return positions


def default_evaluator(config: RunConfig, objective):
    """Seeded evaluation stream matching the loop's derivation."""
    counter = itertools.count()

    def evaluate(subset: ComboNode) -> float:
        return float(objective.evaluate(subset, derive_seed(config.seed, "eval", next(counter))))

    return evaluate


def initialize(config: RunConfig, oracle: NeighborOracle, objective,
               rng: np.random.Generator, evaluate=None
               ) -> tuple[ComboNode, list[tuple[ComboNode, float]]]:
    """Produce the start combo-node and the log of initialization queries.

    random_walk: k independent walkers; their joint positions are queried
    before any step and after each step, n_init queries total (a position's
    neighborhood is only revealed once it has been queried).
    uniform_random: n_init uniform subsets.  none: a uniform subset, zero
    queries.  The best initial query becomes the start.
    """
    n = oracle.num_nodes
    if config.k > n:
        raise InvalidParameters(f"k={config.k} exceeds graph size {n}")
    if evaluate is None:
        evaluate = default_evaluator(config, objective)
    universe = list(range(n))
    log: list[tuple[ComboNode, float]] = []

    if config.init_method == "none":
        return _uniform_subset(config.k, universe, rng), log

    if config.init_method == "uniform_random":
        for _ in range(config.n_init):
            subset = _uniform_subset(config.k, universe, rng)
            log.append((subset, evaluate(subset)))
    else:  # random_walk
        positions = list(_uniform_subset(config.k, universe, rng))
        log.append((combo_node(positions), evaluate(combo_node(positions))))
        for _ in range(config.n_init - 1):
            def step_from(i: int) -> int:
                nbrs = oracle.reveal(positions[i])
                if not nbrs:
                    return positions[i]  # stranded walker stays put
                return int(nbrs[rng.integers(0, len(nbrs))])

            proposals = [step_from(i) for i in range(config.k)]
            positions = _resolve_collisions(proposals, n, rng, restep=step_from)
            subset = combo_node(positions)
            log.append((subset, evaluate(subset)))

    best_subset, _ = max(log, key=lambda item: item[1])
    return best_subset, log


def restart_location(method: str, *, start: ComboNode, incumbent: ComboNode,
                     oracle: NeighborOracle, k: int,
                     rng: np.random.Generator) -> ComboNode:
    """Post-restart location: a random subset of revealed nodes, the global
    incumbent, or the run's start."""
    if method == "initial":
        return start
    if method == "best_queried":
        return incumbent
    if method != "random":
        raise InvalidParameters(f"unknown restart method {method!r}")
    pool = oracle.candidate_nodes()
    if len(pool) < k:
        pool = list(range(oracle.num_nodes))
    return _uniform_subset(k, pool, rng)


# ---------------------------------------------------------------------------
# The outer loop
# ---------------------------------------------------------------------------

@dataclass
class _LoopState:
    """Mutable bookkeeping of one BO run."""

    queried: dict[ComboNode, float] = field(default_factory=dict)
    incumbent: ComboNode | None = None
    incumbent_value: float = -math.inf
    explored: set[ComboNode] = field(default_factory=set)
    failures: int = 0

    def record_query(self, subset: ComboNode, value: float) -> None:
        self.queried[subset] = value
        self.explored.add(subset)
        if value > self.incumbent_value:
            self.incumbent, self.incumbent_value = subset, value


def run_graphcombo(config: RunConfig, oracle: NeighborOracle, objective) -> RunRecord:
    """BO over node subsets with combo-subgraph trust regions."""
    return _run_bo(config, oracle, objective, noisy=False)


def run_graphcombo_noisy(config: RunConfig, oracle: NeighborOracle, objective) -> RunRecord:
    """Noisy-setting variant: the next subgraph center is the posterior-mean
    argmax over the whole current subgraph; failtol still follows
    observations."""
    if not config.noisy_variant:
        config = replace(config, noisy_variant=True)
    return _run_bo(config, oracle, objective, noisy=True)


def _run_bo(config: RunConfig, oracle: NeighborOracle, objective, noisy: bool) -> RunRecord:
    rng_init = derive_rng(config.seed, "init")
    rng_sampler = derive_rng(config.seed, "sampler")
    rng_restart = derive_rng(config.seed, "restart")
    rng_fit = derive_rng(config.seed, "fit")
    rng_fallback = derive_rng(config.seed, "fallback")

    eval_counter = itertools.count()
    evals_used = 0

    def evaluate(subset: ComboNode) -> float:
        nonlocal evals_used
        seed = derive_seed(config.seed, "eval", next(eval_counter))
        evals_used += 1
        return float(objective.evaluate(subset, seed))

    method = "graphcombo_noisy" if noisy else "graphcombo"
    record = RunRecord(method=method, seed=config.seed)
    start, init_log = initialize(config, oracle, objective, rng_init, evaluate)
    record.init_queries = list(init_log)
    record.start = start
    n_init = evals_used

    state = _LoopState()
    for subset, value in init_log:
        state.record_query(subset, value)
    center = start

    surrogate: SubgraphSurrogate | None = None
    subgraph = None
    epoch_queried: set[int] = set()  # local indices queried in this epoch
    epoch_best = -math.inf  # improvement bar: best value in the training set
    resample_needed = True
    need_restart = False
    next_refit_size = 0

    for t in range(1, config.T + 1):
        restarted = False
        center_moved = False
        consumed = False
        candidates: list[int] = []
        allow_requery = False

        for _attempt in range(4):
            if need_restart:
                restarted = True
                need_restart = False
                target = restart_location(
                    config.restart_method, start=start, incumbent=state.incumbent,
                    oracle=oracle, k=config.k, rng=rng_restart,
                )
                if target != center:
                    center = target
                    center_moved = True
                    resample_needed = True
                # unchanged center: keep the cached subgraph and basis (they
                # are only recomputed when the center changes); the training
                # history persists, so the search continues on unqueried
                # candidates with the failure counter cleared
                state.failures = 0
                if center not in state.queried:
                    # unknown restart point: querying it is this move
                    value = evaluate(center)
                    state.record_query(center, value)
                    record.rows.append(_make_row(
                        t, center, value, state, center, start, oracle,
                        center_moved, restarted, None))
                    consumed = True
                    break

            if center not in state.queried:
                # fresh start with init_method="none": query it directly
                value = evaluate(center)
                state.record_query(center, value)
                record.rows.append(_make_row(
                    t, center, value, state, center, start, oracle,
                    center_moved, restarted, None))
                consumed = True
                break

            if resample_needed:
                subgraph = sample_combo_subgraph(center, config.Q, config.l_max,
                                                 oracle, rng_sampler)
                state.explored.update(subgraph.nodes)
                surrogate = _fresh_surrogate(config, subgraph)
                epoch_queried = _sync_training(surrogate, subgraph, state)
                if len(surrogate.indices) >= 2:
                    surrogate.refit(config.fit_restarts, rng_fit,
                                    maxfun=config.fit_maxfun)
                epoch_best = max(surrogate.values) if surrogate.values else -math.inf
                next_refit_size = _next_refit(len(surrogate.indices), config)
                resample_needed = False

            candidates = [i for i in range(subgraph.size) if i not in epoch_queried]
            if candidates:
                break
            if allow_requery:
                # the whole reachable region is known: re-querying is the
                # only way to keep consuming budget (values are logged again)
                candidates = [i for i in range(subgraph.size) if i != subgraph.center]
                if not candidates:
                    candidates = [subgraph.center]
                epoch_queried = set()
                break
            # exhausted region: restart; if the follow-up region is also
            # fully known, the next pass may re-query
            need_restart = True
            resample_needed = True
            allow_requery = True

        if consumed:
            continue
        if not candidates:
            raise ExhaustedSubgraph("could not recover candidates after restarts")

        mean, var = surrogate.posterior_all()
        pick = _argmax_ei(mean, var, epoch_best, candidates)
        subset = subgraph.nodes[pick]
        value = evaluate(subset)
        state.record_query(subset, value)
        epoch_queried.add(pick)
        if pick not in surrogate.indices:
            surrogate.add_point(pick, value)

        improved = value > epoch_best
        if improved:
            epoch_best = value
            state.failures = 0
        else:
            state.failures += 1
            if state.failures >= config.failtol:
                need_restart = True

        if noisy:
            post_mean, _ = surrogate.posterior_all()
            target = subgraph.nodes[int(np.argmax(post_mean))]
            if target != center:
                center = target
                center_moved = True
                resample_needed = True
        elif improved and subset != center:
            center = subset
            center_moved = True
            resample_needed = True

        if not resample_needed and len(surrogate.indices) >= next_refit_size:
            surrogate.refit(config.fit_restarts, rng_fit, maxfun=config.fit_maxfun)
            next_refit_size = _next_refit(len(surrogate.indices), config)

        record.rows.append(_make_row(
            t, subset, value, state, center, start, oracle,
            center_moved, restarted, surrogate.hyperparameter_row()))

    assert evals_used == n_init + config.T, "query budget bookkeeping broke"
    return record


def _next_refit(current_size: int, config: RunConfig) -> int:
    """Training size at which hyperparameters are refit next.

    Geometric back-off keeps refits frequent while the training set is
    small (where they are both cheap and most informative) without paying
    the full per-iteration refit cost late in a run.  refit_every forces a
    fixed cadence instead.
    """
    if config.refit_every:
        return current_size + config.refit_every
    return max(current_size + 2, int(current_size * 1.3))


def _fresh_surrogate(config: RunConfig, subgraph) -> SubgraphSurrogate:
    if config.kernel in ("polynomial", "sum_inverse_polynomial"):
        order = kernel_order(subgraph.local_diameter())
    else:
        order = 2
    kernel = default_kernel(config.kernel, subgraph.size, order)
    return SubgraphSurrogate(subgraph.ensure_basis(), kernel)


def _sync_training(surrogate: SubgraphSurrogate, subgraph, state: _LoopState) -> set[int]:
    """Training set = previously queried combo-nodes inside the subgraph."""
    indices, values = [], []
    for subset, value in state.queried.items():
        local = subgraph.index.get(subset)
        if local is not None:
            indices.append(local)
            values.append(value)
    surrogate.set_training(indices, values)
    return set(indices)


def _make_row(t, subset, value, state: _LoopState, center, start, oracle,
              center_moved, restarted, hyperparameters) -> RunRow:
    return RunRow(
        t=t,
        subset=subset,
        y=value,
        best_y=state.incumbent_value,
        incumbent=state.incumbent,
        explored=len(state.explored),
        revealed=oracle.reveal_count,
        distance_from_start=set_difference_distance(center, start),
        center_moved=center_moved,
        restarted=restarted,
        hyperparameters=hyperparameters,
    )
