"""The six comparison methods, sharing the objective/oracle/budget contract.

Every baseline consumes exactly T evaluations after initialization and uses
the same labeled initialization stream as the BO loop, so all methods of a
given seed share the same best-start.
"""

from __future__ import annotations

import itertools
from collections import deque

import numpy as np

from .combo import ComboNode, combo_neighbors, combo_node, set_difference_distance
from .errors import InvalidParameters
from .graphs import NeighborOracle
from .records import RunRecord, RunRow
from .rng import derive_rng, derive_seed
from .search import (RunConfig, _LoopState, _resolve_collisions, _uniform_subset,
                     initialize, restart_location)

BASELINE_KINDS = (
    "random_search", "k_random_walk", "k_local_search",
    "bfs_combo", "dfs_combo", "local_search_combo",
)


class _BaselineRun:
    """Shared bookkeeping: seeded evaluation stream, init log, row building."""

    def __init__(self, method: str, config: RunConfig, oracle: NeighborOracle | None,
                 objective, universe_size: int | None = None):
        self.method = method
        self.config = config
        self.oracle = oracle
        self.objective = objective
        self.counter = itertools.count()
        self.evals = 0
        self.record = RunRecord(method=method, seed=config.seed)
        self.state = _LoopState()
        rng_init = derive_rng(config.seed, "init")
        if oracle is None and config.init_method == "random_walk":
            raise InvalidParameters("random_walk initialization needs a neighbor oracle")
        init_oracle = oracle if oracle is not None else _UniverseOracle(universe_size or 0)
        self.start, init_log = initialize(config, init_oracle, objective,
                                          rng_init, self.evaluate)
        self.record.init_queries = list(init_log)
        self.record.start = self.start
        self.n_init = self.evals
        for subset, value in init_log:
            self.state.record_query(subset, value)

    def evaluate(self, subset: ComboNode) -> float:
        seed = derive_seed(self.config.seed, "eval", next(self.counter))
        self.evals += 1
        return float(self.objective.evaluate(subset, seed))

    def query(self, t: int, subset: ComboNode, *, position: ComboNode,
              moved: bool = False, restarted: bool = False) -> float:
        value = self.evaluate(subset)
        self.state.record_query(subset, value)
        self.record.rows.append(RunRow(
            t=t,
            subset=subset,
            y=value,
            best_y=self.state.incumbent_value,
            incumbent=self.state.incumbent,
            explored=len(self.state.explored),
            revealed=self.oracle.reveal_count if self.oracle is not None else 0,
            distance_from_start=set_difference_distance(position, self.start),
            center_moved=moved,
            restarted=restarted,
        ))
        return value

    def finish(self) -> RunRecord:
        assert self.evals == self.n_init + self.config.T, "budget bookkeeping broke"
        return self.record


class _UniverseOracle:
    """Minimal stand-in when a method only needs the node universe."""

    def __init__(self, num_nodes: int):
        self.num_nodes = num_nodes
        self.reveal_count = 0

    def reveal(self, v: int):  # pragma: no cover - initialize() never walks here
        raise InvalidParameters("no structure available without an oracle")

    def candidate_nodes(self) -> list[int]:
        return list(range(self.num_nodes))


def run_random_search(config: RunConfig, node_universe: int | list[int], objective,
                      oracle: NeighborOracle | None = None) -> RunRecord:
    """T i.i.d. uniform k-subsets of the node universe."""
    universe = list(range(node_universe)) if isinstance(node_universe, int) else list(node_universe)
    if len(universe) < config.k:
        raise InvalidParameters(f"universe smaller than k={config.k}")
    run = _BaselineRun("random_search", config, oracle, objective,
                       universe_size=len(universe))
    rng = derive_rng(config.seed, "random_search")
    for t in range(1, config.T + 1):
        subset = _uniform_subset(config.k, universe, rng)
        run.query(t, subset, position=subset)
    return run.finish()


def run_k_random_walk(config: RunConfig, oracle: NeighborOracle, objective) -> RunRecord:
    """k synchronized walkers; their joint positions form each query."""
    run = _BaselineRun("k_random_walk", config, oracle, objective)
    rng = derive_rng(config.seed, "k_random_walk")
    positions = list(run.start)
    t = 1
    if run.start not in run.state.queried:
        run.query(t, run.start, position=run.start)
        t += 1
    while t <= config.T:
        positions = _walk_step(positions, oracle, rng)
        subset = combo_node(positions)
        run.query(t, subset, position=subset, moved=True)
        t += 1
    return run.finish()


def run_k_local_search(config: RunConfig, oracle: NeighborOracle, objective) -> RunRecord:
    """Propose a k-walker step, accept only on strict improvement."""
    run = _BaselineRun("k_local_search", config, oracle, objective)
    rng = derive_rng(config.seed, "k_local_search")
    current = run.start
    t = 1
    if current not in run.state.queried:
        run.query(t, current, position=current)
        t += 1
    current_value = run.state.queried[current]
    while t <= config.T:
        proposal_positions = _walk_step(list(current), oracle, rng)
        proposal = combo_node(proposal_positions)
        value = run.query(t, proposal, position=current, moved=False)
        if value > current_value:
            current, current_value = proposal, value
            run.record.rows[-1].center_moved = True
            run.record.rows[-1].distance_from_start = set_difference_distance(
                current, run.start)
        t += 1
    return run.finish()


def _walk_step(positions: list[int], oracle: NeighborOracle,
               rng: np.random.Generator) -> list[int]:
    def step_from(i: int) -> int:
        nbrs = oracle.reveal(positions[i])
        if not nbrs:
            return positions[i]
        return int(nbrs[rng.integers(0, len(nbrs))])

    proposals = [step_from(i) for i in range(len(positions))]
    return _resolve_collisions(proposals, oracle.num_nodes, rng, restep=step_from)


def run_bfs_combo(config: RunConfig, oracle: NeighborOracle, objective) -> RunRecord:
    return _run_traversal("bfs_combo", config, oracle, objective, depth_first=False)


def run_dfs_combo(config: RunConfig, oracle: NeighborOracle, objective) -> RunRecord:
    return _run_traversal("dfs_combo", config, oracle, objective, depth_first=True)


def _run_traversal(method: str, config: RunConfig, oracle: NeighborOracle,
                   objective, depth_first: bool) -> RunRecord:
    """BFS/DFS over the combo-graph generated on the fly; expansion order is
    randomized per seed; no combo-node is visited twice."""
    run = _BaselineRun(method, config, oracle, objective)
    rng = derive_rng(config.seed, method)
    visited: set[ComboNode] = {run.start}
    container: deque[ComboNode] = deque()

    def expand(node: ComboNode) -> None:
        nbrs = [w for w in combo_neighbors(node, oracle) if w not in visited]
        run.state.explored.update(nbrs)
        order = rng.permutation(len(nbrs))
        for i in order:
            container.append(nbrs[int(i)])

    t = 1
    if run.start not in run.state.queried:
        run.query(t, run.start, position=run.start)
        t += 1
    expand(run.start)
    while t <= config.T:
        restarted = False
        node = None
        while container:
            node = container.pop() if depth_first else container.popleft()
            if node not in visited:
                break
            node = None
        if node is None:
            node = _fresh_random_location(config, oracle, visited, rng)
            restarted = True
        visited.add(node)
        run.query(t, node, position=node, restarted=restarted)
        expand(node)
        t += 1
    return run.finish()


def run_local_search_combo(config: RunConfig, oracle: NeighborOracle, objective) -> RunRecord:
    """Query a uniform unqueried combo-neighbor of the best-visited node;
    restart from a random location when its neighborhood is exhausted."""
    run = _BaselineRun("local_search_combo", config, oracle, objective)
    rng = derive_rng(config.seed, "local_search_combo")
    reference = run.start
    t = 1
    if reference not in run.state.queried:
        run.query(t, reference, position=reference)
        t += 1
    while t <= config.T:
        nbrs = combo_neighbors(reference, oracle)
        run.state.explored.update(nbrs)
        open_nbrs = [w for w in nbrs if w not in run.state.queried]
        if open_nbrs:
            pick = open_nbrs[int(rng.integers(0, len(open_nbrs)))]
            previous_best = run.state.incumbent_value
            value = run.query(t, pick, position=reference)
            if value > previous_best:
                reference = pick
                run.record.rows[-1].center_moved = True
                run.record.rows[-1].distance_from_start = set_difference_distance(
                    reference, run.start)
        else:
            reference = _fresh_random_location(config, oracle, set(run.state.queried), rng)
            run.query(t, reference, position=reference, moved=True, restarted=True)
        t += 1
    return run.finish()


def _fresh_random_location(config: RunConfig, oracle: NeighborOracle,
                           excluded: set[ComboNode], rng: np.random.Generator,
                           tries: int = 100) -> ComboNode:
    pool = oracle.candidate_nodes()
    if len(pool) < config.k:
        pool = list(range(oracle.num_nodes))
    for _ in range(tries):
        subset = _uniform_subset(config.k, pool, rng)
        if subset not in excluded:
            return subset
    return _uniform_subset(config.k, list(range(oracle.num_nodes)), rng)


BASELINE_RUNNERS = {
    "random_search": run_random_search,
    "k_random_walk": run_k_random_walk,
    "k_local_search": run_k_local_search,
    "bfs_combo": run_bfs_combo,
    "dfs_combo": run_dfs_combo,
    "local_search_combo": run_local_search_combo,
}
