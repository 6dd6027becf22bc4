"""Experiment orchestration: cells, sweeps, protocols, and persistence.

A cell is one (method, seed) pair.  Cells are independent (isolated RNG
streams and oracles), so they run across processes; every artifact is
written atomically and rerunning an identical config reproduces run files
byte for byte.
"""

from __future__ import annotations

import itertools
import json
import math
import multiprocessing
import os
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import kernel_validation, smoothness_curves
from .baselines import BASELINE_RUNNERS
from .centrality import degree_centrality, eigenvector_centrality, pagerank
from .config import ExperimentConfig, MethodSpec
from .epidemics import (IcParams, SirParams, flatten_curve_objective,
                        influence_objective, patient_zero_objective)
from .errors import ConfigError, GraphComboError
from .graphs import (Graph, NeighborOracle, generate_ba, generate_grid2d,
                     generate_sbm, generate_ws, load_edge_list, save_edge_list)
from .objectives import (Objective, ackley_grid_scores, argmax_subset,
                         avg_node_score, eigenvector_signal_objective,
                         ground_truth, standardized_pagerank_objective,
                         transitivity_drop_objective)
from .records import (RunRecord, read_jsonl, summarize_curves, write_jsonl_atomic,
                      write_summary_csv)
from .rng import derive_seed
from .search import run_graphcombo, run_graphcombo_noisy


def build_graph(spec: dict) -> Graph:
    kind = spec["kind"]
    if kind == "ba":
        return generate_ba(spec["n"], spec["m"], spec.get("seed", 0))
    if kind == "ws":
        return generate_ws(spec["n"], spec["k_ring"], spec["p"], spec.get("seed", 0))
    if kind == "sbm":
        return generate_sbm(spec["sizes"], spec["p_within"], spec["p_between"],
                            spec.get("seed", 0))
    if kind == "grid":
        return generate_grid2d(spec["rows"], spec["cols"])
    if kind == "edge_list":
        with open(spec["path"]) as handle:
            return load_edge_list(handle)
    raise ConfigError([f"unknown graph kind {kind!r}"])


def build_objective(spec: dict, graph: Graph, k: int, realization_seed: int = 0
                    ) -> Objective:
    """Instantiate the configured objective on the graph.

    realization_seed only matters for objectives that freeze a random
    realization at construction (one epidemic per run seed).
    """
    kind = spec["kind"]
    if kind == "avg_eigenvector_centrality":
        return avg_node_score(eigenvector_centrality(graph), name=kind)
    if kind == "avg_degree_centrality":
        return avg_node_score(degree_centrality(graph), name=kind)
    if kind == "avg_pagerank":
        return avg_node_score(pagerank(graph, d=spec.get("damping", 0.85)), name=kind)
    if kind == "ackley_grid":
        scores = ackley_grid_scores(spec["rows"], spec["cols"],
                                    spec.get("noise_sigma", 0.5), spec.get("seed", 0))
        return avg_node_score(scores, name=kind)
    if kind == "eigenvector_signal":
        return eigenvector_signal_objective(graph, spec.get("j", 3), k)
    if kind == "standardized_pagerank":
        return standardized_pagerank_objective(graph, k, spec.get("noise_sigma", 0.0))
    if kind == "flatten_curve":
        params = SirParams(
            init_fraction=spec.get("init_fraction", 0.1),
            beta=spec.get("beta", 1e-3), gamma=spec.get("gamma", 1e-2),
            eps=spec.get("eps", 0.0), horizon=spec.get("horizon", 120),
            n_sims=spec.get("n_sims", 100),
        )
        return flatten_curve_objective(graph, params)
    if kind == "patient_zero":
        params = SirParams(
            init_fraction=spec.get("init_fraction", 0.005),
            beta=spec.get("beta", 0.01), gamma=spec.get("gamma", 0.01),
            eps=spec.get("eps", 0.005), horizon=spec.get("horizon", 100), n_sims=1,
        )
        return patient_zero_objective(graph, params, seed=realization_seed)
    if kind == "influence":
        params = IcParams(p=spec.get("p", 0.05), n_sims=spec.get("n_sims", 1000))
        return influence_objective(graph, params)
    if kind == "transitivity_drop":
        return transitivity_drop_objective(graph)
    raise ConfigError([f"unknown objective kind {kind!r}"])


def _objective_spec_with_grid(config: ExperimentConfig) -> dict:
    spec = dict(config.objective)
    if spec.get("kind") == "ackley_grid":
        spec.setdefault("rows", config.graph["rows"])
        spec.setdefault("cols", config.graph["cols"])
    return spec


def run_cell(config: ExperimentConfig, method: MethodSpec, seed_index: int
             ) -> RunRecord:
    """Execute one (method, seed) cell from scratch (worker-safe)."""
    graph = build_graph(config.graph)
    run_config = config.run_config(method, seed_index)
    realization = derive_seed(run_config.seed, "objective-realization")
    objective = build_objective(_objective_spec_with_grid(config), graph,
                                config.k, realization)
    search_graph = objective.search_graph if objective.search_graph is not None else graph
    oracle = NeighborOracle(search_graph, hidden=objective.hidden_graph)
    name = method.name
    if name == "graphcombo":
        return run_graphcombo(run_config, oracle, objective)
    if name == "graphcombo_noisy":
        return run_graphcombo_noisy(run_config, oracle, objective)
    if name == "random_search":
        return BASELINE_RUNNERS[name](run_config, search_graph.num_nodes,
                                      objective, oracle=oracle)
    return BASELINE_RUNNERS[name](run_config, oracle, objective)


def cell_ground_truth(config: ExperimentConfig, seed_index: int) -> float | None:
    graph = build_graph(config.graph)
    realization = derive_seed(config.base_seed + seed_index, "objective-realization")
    objective = build_objective(_objective_spec_with_grid(config), graph,
                                config.k, realization)
    return ground_truth(objective, config.k, graph)


def _run_filename(method: str, seed: int) -> str:
    return f"{method}-seed{seed:04d}.jsonl"


def _worker(args) -> dict:
    config, method, seed_index, out_dir = args
    record = run_cell(config, method, seed_index)
    graph_labels = None  # rows carry search-space ids; maps live in the manifest
    path = Path(out_dir) / _run_filename(method.name, config.base_seed + seed_index)
    write_jsonl_atomic(record, path, labels=graph_labels)
    return {
        "method": method.name,
        "seed": config.base_seed + seed_index,
        "file": path.name,
        "rows": len(record.rows),
        "best_y": record.best_y,
        "start": list(record.start) if record.start else None,
        "init_queries": [[list(s), y] for s, y in record.init_queries],
    }


def cmd_run(config: ExperimentConfig, out_dir: str | Path | None = None,
            jobs: int = 1) -> Path:
    """Execute all (method x seed) cells; write JSONL runs, summary CSV, and
    a manifest.  Returns the output directory."""
    out = Path(out_dir if out_dir is not None else config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t_start = time.time()
    tasks = [
        (config, method, seed_index, str(out))
        for method in config.methods
        for seed_index in range(config.n_seeds)
    ]
    if jobs > 1 and len(tasks) > 1:
        with multiprocessing.Pool(processes=jobs) as pool:
            entries = list(pool.imap_unordered(_worker, tasks))
    else:
        entries = [_worker(task) for task in tasks]
    entries.sort(key=lambda e: (e["method"], e["seed"]))

    # ground truth (per seed when the realization is seed-dependent)
    truths: dict[str, float | None] = {}
    objective_kind = config.objective.get("kind")
    per_seed_truth = objective_kind == "patient_zero"
    for seed_index in range(config.n_seeds):
        value = cell_ground_truth(config, seed_index)
        truths[str(config.base_seed + seed_index)] = value
        if not per_seed_truth:
            break

    summary_path = _summarize_dir(out, config, truths, per_seed_truth)

    graph = build_graph(config.graph)
    objective = build_objective(_objective_spec_with_grid(config), graph, config.k,
                                derive_seed(config.base_seed, "objective-realization"))
    manifest = {
        "version": __version__,
        "wall_clock_seconds": time.time() - t_start,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "config": _config_echo(config),
        "runs": entries,
        "ground_truth": truths,
        "per_seed_ground_truth": per_seed_truth,
        "search_space": "line_graph" if objective.edge_map is not None else "nodes",
        "edge_map": ([[u, v] for u, v in objective.edge_map]
                     if objective.edge_map is not None else None),
        "node_labels": graph.original_labels,
        "summary": summary_path.name,
    }
    tmp = out / "manifest.json.tmp"
    tmp.write_text(json.dumps(manifest, indent=2, sort_keys=True))
    os.replace(tmp, out / "manifest.json")
    return out


def _config_echo(config: ExperimentConfig) -> dict:
    return {
        "graph": config.graph,
        "objective": config.objective,
        "methods": [{"name": m.name, "overrides": m.overrides} for m in config.methods],
        "run": {
            "k": config.k, "T": config.T, "Q": config.Q, "failtol": config.failtol,
            "l_max": None if math.isinf(config.l_max) else config.l_max,
            "restart_method": config.restart_method,
            "init_method": config.init_method, "n_init": config.n_init,
            "kernel": config.kernel, "n_seeds": config.n_seeds,
            "seed": config.base_seed,
        },
    }


def _summarize_dir(out: Path, config: ExperimentConfig, truths: dict,
                   per_seed_truth: bool) -> Path:
    summaries = {}
    for method in config.methods:
        rows_by_seed = []
        gts = []
        for seed_index in range(config.n_seeds):
            seed = config.base_seed + seed_index
            path = out / _run_filename(method.name, seed)
            with open(path) as handle:
                rows_by_seed.append(read_jsonl(handle, str(path)))
            gts.append(truths.get(str(seed)) if per_seed_truth
                       else truths.get(str(config.base_seed)))
        if any(g is None for g in gts):
            summaries[method.name] = summarize_curves(rows_by_seed, None)
        elif per_seed_truth:
            summaries[method.name] = _summarize_per_seed_regret(rows_by_seed, gts)
        else:
            summaries[method.name] = summarize_curves(rows_by_seed, gts[0])
    summary_path = out / "summary.csv"
    tmp = out / "summary.csv.tmp"
    with open(tmp, "w") as handle:
        write_summary_csv(handle, summaries)
    os.replace(tmp, summary_path)
    return summary_path


def _summarize_per_seed_regret(rows_by_seed, gts) -> list[dict]:
    base = summarize_curves(rows_by_seed, None)
    t_len = len(base)
    for i in range(t_len):
        regrets = np.array([
            gts[s] - rows_by_seed[s][i]["best_y"] for s in range(len(rows_by_seed))
        ])
        base[i]["regret_mean"] = float(regrets.mean())
        base[i]["regret_stderr"] = (
            float(regrets.std(ddof=1) / np.sqrt(len(regrets))) if len(regrets) > 1 else 0.0
        )
    return base


def cmd_summarize(run_dir: str | Path) -> Path:
    """Aggregate an existing run directory into summary.csv."""
    out = Path(run_dir)
    manifest_path = out / "manifest.json"
    if not manifest_path.exists():
        raise GraphComboError(f"no manifest.json in {out}")
    manifest = json.loads(manifest_path.read_text())
    truths = manifest.get("ground_truth", {})
    per_seed = manifest.get("per_seed_ground_truth", False)
    by_method: dict[str, list] = {}
    for entry in manifest["runs"]:
        by_method.setdefault(entry["method"], []).append(entry)
    summaries = {}
    for method, entries in by_method.items():
        entries = sorted(entries, key=lambda e: e["seed"])
        rows_by_seed, gts = [], []
        for entry in entries:
            with open(out / entry["file"]) as handle:
                rows_by_seed.append(read_jsonl(handle, entry["file"]))
            base_seed = min(e["seed"] for e in entries)
            gts.append(truths.get(str(entry["seed"])) if per_seed
                       else truths.get(str(base_seed)))
        if any(g is None for g in gts):
            summaries[method] = summarize_curves(rows_by_seed, None)
        elif per_seed:
            summaries[method] = _summarize_per_seed_regret(rows_by_seed, gts)
        else:
            summaries[method] = summarize_curves(rows_by_seed, gts[0])
    tmp = out / "summary.csv.tmp"
    with open(tmp, "w") as handle:
        write_summary_csv(handle, summaries)
    os.replace(tmp, out / "summary.csv")
    return out / "summary.csv"


def cmd_sweep(config: ExperimentConfig, out_dir: str | Path | None = None,
              jobs: int = 1) -> Path:
    """Cartesian product over the [sweep] axes; one cmd_run per cell plus a
    combined long-format CSV."""
    out = Path(out_dir if out_dir is not None else config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    axes = config.sweep
    if not axes:
        cells = [{}]
    else:
        keys = sorted(axes)
        cells = [dict(zip(keys, combo)) for combo in itertools.product(*(axes[key] for key in keys))]
    combined_rows: list[str] = []
    header = None
    for cell in cells:
        label = "-".join(f"{key}{value}" for key, value in sorted(cell.items())) or "base"
        cell_config = replace(
            config,
            **{("T" if key == "t" else "Q" if key == "q" else key): value
               for key, value in cell.items()},
        )
        cell_dir = cmd_run(cell_config, out / f"cell-{label}", jobs=jobs)
        with open(cell_dir / "summary.csv") as handle:
            lines = handle.read().strip().split("\n")
        if header is None:
            header = "cell," + lines[0]
            combined_rows.append(header)
        combined_rows.extend(f"{label},{line}" for line in lines[1:])
    (out / "sweep.csv").write_text("\n".join(combined_rows) + "\n")
    return out


def cmd_kernel_validate(config: ExperimentConfig, out_dir: str | Path | None = None
                        ) -> Path:
    """App-style kernel validation on the enumerated combo-graph."""
    out = Path(out_dir if out_dir is not None else config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    opts = config.validate_opts
    n_seeds = int(opts.get("n_seeds", 20))
    signal_j = int(opts.get("signal_j", 3))
    noise_sigma = float(opts.get("noise_sigma", 0.0))
    train_fraction = float(opts.get("train_fraction", 0.25))
    kernels = tuple(part.strip() for part in opts.get(
        "kernels", "diffusion,diffusion_ard,polynomial,sum_inverse_polynomial").split(","))
    fit_restarts = int(opts.get("fit_restarts", 1))
    fit_maxfun = int(opts.get("fit_maxfun", 30))

    def factory(seed: int) -> Graph:
        spec = dict(config.graph)
        spec["seed"] = seed
        return build_graph(spec)

    results = kernel_validation(
        factory, config.k, kernels=kernels, n_seeds=n_seeds,
        train_fraction=train_fraction, signal_j=signal_j, noise_sigma=noise_sigma,
        base_seed=config.base_seed, fit_restarts=fit_restarts, fit_maxfun=fit_maxfun,
    )
    path = out / "kernel_validation.csv"
    with open(path, "w") as handle:
        handle.write("kernel,rho_mean,rho_stderr,n_seeds\n")
        for result in results:
            handle.write(f"{result.kernel},{result.mean!r},{result.stderr!r},{n_seeds}\n")
    return path


def cmd_smoothness(config: ExperimentConfig, out_dir: str | Path | None = None) -> Path:
    """Cumulative spectral-energy curves for eigenvector-average signals."""
    out = Path(out_dir if out_dir is not None else config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    opts = config.smoothness_opts
    n_seeds = int(opts.get("n_seeds", 50))
    j_values = tuple(int(part) for part in
                     opts.get("j_values", "2,4,8,12,16").replace(",", " ").split())

    def factory(seed: int) -> Graph:
        spec = dict(config.graph)
        spec["seed"] = seed
        return build_graph(spec)

    curves = smoothness_curves(factory, config.k, j_values=j_values,
                               n_seeds=n_seeds, base_seed=config.base_seed)
    path = out / "smoothness.csv"
    with open(path, "w") as handle:
        handle.write("j,index,energy_mean,energy_stderr\n")
        for j in sorted(curves):
            mean, stderr = curves[j]["mean"], curves[j]["stderr"]
            for idx in range(len(mean)):
                handle.write(f"{j},{idx},{mean[idx]!r},{stderr[idx]!r}\n")
    return path


def cmd_ground_truth(config: ExperimentConfig, out_dir: str | Path | None = None
                     ) -> tuple[float | None, tuple | None, Path]:
    """Exact optimum (value + subset) when separable or brute-forceable."""
    out = Path(out_dir if out_dir is not None else config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    graph = build_graph(config.graph)
    objective = build_objective(_objective_spec_with_grid(config), graph, config.k,
                                derive_seed(config.base_seed, "objective-realization"))
    result = argmax_subset(objective, config.k, graph)
    path = out / "ground_truth.json"
    if result is None:
        path.write_text(json.dumps({"available": False}, indent=2))
        return None, None, path
    subset, value = result
    labels = graph.original_labels
    reported = [labels[v] for v in subset] if labels else list(subset)
    payload = {
        "available": True,
        "value": value,
        "subset": reported,
        "search_space": "line_graph" if objective.edge_map is not None else "nodes",
    }
    if objective.edge_map is not None:
        payload["edges"] = [list(objective.edge_map[i]) for i in subset]
    path.write_text(json.dumps(payload, indent=2))
    return value, subset, path


def cmd_generate(config: ExperimentConfig, out_path: str | Path) -> Path:
    """Materialize the configured graph to an edge-list file."""
    graph = build_graph(config.graph)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    tmp = out_path.with_name(out_path.name + ".tmp")
    with open(tmp, "w") as handle:
        save_edge_list(graph, handle)
    os.replace(tmp, out_path)
    return out_path
