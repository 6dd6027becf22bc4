"""SIR and independent-cascading simulators plus the objectives built on them.

Simulations are synchronous and seeded; Monte Carlo objectives derive one
sub-seed per replica from the evaluation seed and average in replica order,
so results are bit-stable for a given (subset, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .combo import ComboNode
from .errors import InvalidParameters
from .graphs import Graph
from .objectives import Objective
from .rng import derive_rng, derive_seed

SUSCEPTIBLE, INFECTED, RECOVERED = 0, 1, 2


@dataclass(frozen=True)
class SirParams:
    """Parameters of the SIR process."""

    init_fraction: float = 0.1
    beta: float = 1e-3
    gamma: float = 1e-2
    eps: float = 0.0
    horizon: int = 120
    n_sims: int = 100

    def __post_init__(self):
        for name in ("init_fraction", "beta", "gamma", "eps"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise InvalidParameters(f"{name} must be in [0,1], got {value}")
        if self.horizon < 1:
            raise InvalidParameters("horizon must be >= 1")
        if self.n_sims < 1:
            raise InvalidParameters("n_sims must be >= 1")


@dataclass(frozen=True)
class IcParams:
    """Parameters of the independent-cascading process."""

    p: float = 0.05
    n_sims: int = 1000

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise InvalidParameters(f"activation probability must be in [0,1], got {self.p}")
        if self.n_sims < 1:
            raise InvalidParameters("n_sims must be >= 1")


@dataclass
class SirResult:
    """counts[t] = (#S, #I, #R) after t steps; infection_time[v] = step at
    which v became infected (0 for initial seeds, +inf if never)."""

    counts: np.ndarray
    infection_time: np.ndarray

    def ever_infected(self, t: int) -> int:
        return int(np.sum(self.infection_time <= t))


def sir_simulate(g: Graph, protected: set[int] | ComboNode, params: SirParams,
                 seed: int) -> SirResult:
    """Synchronous SIR with spontaneous infection.

    Protected nodes start Recovered and are never infected; round(p*N) of
    the remaining nodes start Infected (uniform, seeded).
    """
    n = g.num_nodes
    rng = derive_rng(seed, "sir")
    protected = set(int(v) for v in protected)
    status = np.zeros(n, dtype=np.int8)
    infection_time = np.full(n, np.inf)
    if protected:
        status[list(protected)] = RECOVERED
    candidates = np.array([v for v in range(n) if v not in protected], dtype=np.int64)
    n_init = min(int(round(params.init_fraction * n)), len(candidates))
    if n_init > 0:
        seeds = rng.choice(candidates, size=n_init, replace=False)
        status[seeds] = INFECTED
        infection_time[seeds] = 0.0

    adjacency = g.adjacency_csr()
    counts = np.zeros((params.horizon + 1, 3), dtype=np.int64)
    counts[0] = _tally(status)
    log_not_beta = math.log1p(-params.beta) if params.beta < 1.0 else -math.inf
    for t in range(1, params.horizon + 1):
        infected_mask = status == INFECTED
        susceptible_mask = status == SUSCEPTIBLE
        if infected_mask.any() or params.eps > 0:
            infected_neighbors = adjacency @ infected_mask.astype(np.float64)
            # P[infection] = 1 - (1-eps) * (1-beta)^{#infected neighbors}
            if params.beta < 1.0:
                escape = (1.0 - params.eps) * np.exp(infected_neighbors * log_not_beta)
            else:
                escape = np.where(infected_neighbors > 0, 0.0, 1.0 - params.eps)
            p_infect = 1.0 - escape
            draws = rng.random(n)
            new_infected = susceptible_mask & (draws < p_infect)
        else:
            new_infected = np.zeros(n, dtype=bool)
        recoveries = infected_mask & (rng.random(n) < params.gamma)
        status[recoveries] = RECOVERED
        status[new_infected] = INFECTED
        infection_time[new_infected] = float(t)
        counts[t] = _tally(status)
    return SirResult(counts=counts, infection_time=infection_time)


def _tally(status: np.ndarray) -> tuple[int, int, int]:
    return (
        int(np.sum(status == SUSCEPTIBLE)),
        int(np.sum(status == INFECTED)),
        int(np.sum(status == RECOVERED)),
    )


def flatten_curve_objective(g: Graph, params: SirParams | None = None,
                            threshold: float = 0.5,
                            cumulative: bool = True) -> Objective:
    """Expected time until half the population has been infected, protected
    subset removed from play, normalized by the horizon.

    t* is censored to the horizon when the threshold is never reached; by
    default "infected" counts cumulative ever-infected nodes (concurrent
    counting available via cumulative=False).
    """
    params = params or SirParams()
    target = threshold * g.num_nodes

    def crossing_time(result: SirResult) -> int:
        if cumulative:
            for t in range(params.horizon + 1):
                if result.ever_infected(t) >= target:
                    return t
        else:
            for t in range(params.horizon + 1):
                if result.counts[t, INFECTED] >= target:
                    return t
        return params.horizon

    def fn(subset: ComboNode, seed: int) -> float:
        times = [
            crossing_time(sir_simulate(g, subset, params, derive_seed(seed, "rep", i)))
            for i in range(params.n_sims)
        ]
        return float(np.mean(times)) / params.horizon

    return Objective(fn=fn, is_stochastic=True, name="flatten_curve")


def patient_zero_objective(g: Graph, params: SirParams | None = None,
                           seed: int = 0) -> Objective:
    """Average earliness-of-infection score over the subset, from one seeded
    epidemic realization; the contact network is treated as hidden."""
    params = params or SirParams(init_fraction=0.005, beta=0.01, gamma=0.01,
                                 eps=0.005, horizon=100, n_sims=1)
    result = sir_simulate(g, set(), params, seed)
    tau = result.infection_time
    scores = np.where(np.isfinite(tau), (1.0 - tau / params.horizon) ** 2, 0.0)

    def fn(subset: ComboNode, eval_seed: int) -> float:
        return float(scores[list(subset)].mean())

    return Objective(fn=fn, name="patient_zero", node_scores=scores, hidden_graph=True)


# ---------------------------------------------------------------------------
# Independent cascading
# ---------------------------------------------------------------------------

def ic_simulate(g: Graph, seeds: ComboNode | set[int], params: IcParams,
                seed: int) -> int:
    """One synchronous cascade; every newly activated node gets one shot at
    each currently inactive neighbor.  Returns the final activated count."""
    rng = derive_rng(seed, "ic")
    active = np.zeros(g.num_nodes, dtype=bool)
    seed_list = [int(v) for v in seeds]
    active[seed_list] = True
    frontier = seed_list
    while frontier:
        attempts: list[int] = []
        for u in frontier:
            for w in g.neighbors(u):
                if not active[w]:
                    attempts.append(w)
        if not attempts:
            break
        wins = np.asarray(attempts)[rng.random(len(attempts)) < params.p]
        frontier = []
        for w in wins:
            w = int(w)
            if not active[w]:
                active[w] = True
                frontier.append(w)
    return int(np.sum(active))


def influence_objective(g: Graph, params: IcParams | None = None) -> Objective:
    """Expected fraction of the network activated by cascades seeded at the
    subset, Monte Carlo averaged with one sub-seed per replica."""
    params = params or IcParams()

    def fn(subset: ComboNode, seed: int) -> float:
        total = 0
        for i in range(params.n_sims):
            total += ic_simulate(g, subset, params, derive_seed(seed, "rep", i))
        return total / (params.n_sims * g.num_nodes)

    return Objective(fn=fn, is_stochastic=True, name="influence")
