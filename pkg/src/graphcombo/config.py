"""Experiment configuration: a flat, typed key-value file (INI dialect).

Sections: [graph], [objective], [run], [output], plus one [method:NAME]
section per method (repeated sections form the method list, in file order,
each optionally overriding run keys).  [sweep] and [validate]/[smoothness]
sections configure the corresponding subcommands.  Validation collects
every problem before rejecting the file.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .search import INIT_METHODS, RESTART_METHODS, RunConfig

GRAPH_KINDS = ("ba", "ws", "sbm", "grid", "edge_list")
OBJECTIVE_KINDS = (
    "avg_eigenvector_centrality", "avg_degree_centrality", "avg_pagerank",
    "ackley_grid", "eigenvector_signal", "standardized_pagerank",
    "flatten_curve", "patient_zero", "influence", "transitivity_drop",
)
METHOD_NAMES = (
    "graphcombo", "graphcombo_noisy", "random_search", "k_random_walk",
    "k_local_search", "bfs_combo", "dfs_combo", "local_search_combo",
)
KERNEL_NAMES = ("diffusion", "diffusion_ard", "polynomial", "sum_inverse_polynomial")

_RUN_KEYS = {
    "k": int, "t": int, "q": int, "failtol": int, "l_max": float,
    "restart_method": str, "init_method": str, "n_init": int,
    "kernel": str, "fit_restarts": int, "fit_maxfun": int, "refit_every": int,
}


@dataclass
class MethodSpec:
    name: str
    overrides: dict = field(default_factory=dict)


@dataclass
class ExperimentConfig:
    graph: dict
    objective: dict
    methods: list[MethodSpec]
    k: int
    T: int = 300
    Q: int = 4000
    failtol: int = 30
    l_max: float = math.inf
    restart_method: str = "best_queried"
    init_method: str = "none"
    n_init: int = 0
    kernel: str = "diffusion"
    fit_restarts: int = 2
    fit_maxfun: int = 60
    refit_every: int = 0
    n_seeds: int = 20
    base_seed: int = 0
    out_dir: str = "runs"
    sweep: dict = field(default_factory=dict)
    validate_opts: dict = field(default_factory=dict)
    smoothness_opts: dict = field(default_factory=dict)

    def run_config(self, method: MethodSpec, seed_index: int) -> RunConfig:
        values = {
            "k": self.k, "T": self.T, "Q": self.Q, "failtol": self.failtol,
            "l_max": self.l_max, "restart_method": self.restart_method,
            "init_method": self.init_method, "n_init": self.n_init,
            "kernel": self.kernel, "fit_restarts": self.fit_restarts,
            "fit_maxfun": self.fit_maxfun, "refit_every": self.refit_every,
        }
        values.update(method.overrides)
        return RunConfig(
            seed=self.base_seed + seed_index,
            noisy_variant=(method.name == "graphcombo_noisy"),
            **values,
        )


def _parse_typed(section: str, key: str, raw: str, kind, problems: list[str]):
    try:
        if kind is bool:
            lowered = raw.strip().lower()
            if lowered in ("true", "yes", "1", "on"):
                return True
            if lowered in ("false", "no", "0", "off"):
                return False
            raise ValueError(raw)
        return kind(raw)
    except ValueError:
        problems.append(f"[{section}] {key}: cannot parse {raw!r} as {kind.__name__}")
        return None


def _int_list(raw: str) -> list[int]:
    return [int(part) for part in raw.replace(",", " ").split()]


def _float_list(raw: str) -> list[float]:
    return [float(part) for part in raw.replace(",", " ").split()]


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    problems: list[str] = []
    if not path.exists():
        raise ConfigError([f"config file not found: {path}"])
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError([f"config parse error: {exc}"]) from None

    graph = _parse_graph(parser, problems)
    objective = _parse_objective(parser, problems)
    run_values = _parse_run(parser, problems)
    methods = _parse_methods(parser, problems)
    out_dir = parser.get("output", "dir", fallback="runs")

    sweep: dict = {}
    if parser.has_section("sweep"):
        for key, raw in parser.items("sweep"):
            key_l = key.lower()
            if key_l not in _RUN_KEYS:
                problems.append(f"[sweep] {key}: not a sweepable run key")
                continue
            try:
                kind = _RUN_KEYS[key_l]
                sweep[key_l] = (_int_list(raw) if kind is int else
                                _float_list(raw) if kind is float else
                                [part.strip() for part in raw.split(",")])
            except ValueError:
                problems.append(f"[sweep] {key}: cannot parse list {raw!r}")

    validate_opts = dict(parser.items("validate")) if parser.has_section("validate") else {}
    smoothness_opts = dict(parser.items("smoothness")) if parser.has_section("smoothness") else {}

    # run semantic validation even when parsing already failed, so the user
    # sees every problem at once
    try:
        config = ExperimentConfig(
            graph=graph, objective=objective, methods=methods, out_dir=out_dir,
            sweep=sweep, validate_opts=validate_opts, smoothness_opts=smoothness_opts,
            **{key: value for key, value in run_values.items() if value is not None},
        )
    except TypeError:
        config = None
    if config is not None:
        _validate(config, problems)
    if problems:
        raise ConfigError(problems)
    if config is None:
        raise ConfigError(["[run] section could not be assembled"])
    return config


def _parse_graph(parser, problems) -> dict:
    if not parser.has_section("graph"):
        problems.append("[graph] section is required")
        return {}
    section = dict(parser.items("graph"))
    kind = section.get("kind")
    out = {"kind": kind}
    if kind not in GRAPH_KINDS:
        problems.append(f"[graph] kind must be one of {GRAPH_KINDS}, got {kind!r}")
        return out
    def want(key, typ, default=None, required=False):
        if key in section:
            out[key] = _parse_typed("graph", key, section[key], typ, problems)
        elif required:
            problems.append(f"[graph] {key} is required for kind={kind}")
        elif default is not None:
            out[key] = default

    if kind == "ba":
        want("n", int, required=True)
        want("m", int, required=True)
        want("seed", int, 0)
    elif kind == "ws":
        want("n", int, required=True)
        want("k_ring", int, required=True)
        want("p", float, required=True)
        want("seed", int, 0)
    elif kind == "sbm":
        if "sizes" in section:
            try:
                out["sizes"] = _int_list(section["sizes"])
            except ValueError:
                problems.append(f"[graph] sizes: cannot parse {section['sizes']!r}")
        else:
            problems.append("[graph] sizes is required for kind=sbm")
        want("p_within", float, required=True)
        want("p_between", float, required=True)
        want("seed", int, 0)
    elif kind == "grid":
        want("rows", int, required=True)
        want("cols", int, required=True)
    elif kind == "edge_list":
        want("path", str, required=True)
        if "path" in out and not Path(out["path"]).exists():
            problems.append(f"[graph] edge-list file not found: {out['path']}")
    return out


_OBJECTIVE_PARAM_TYPES = {
    "noise_sigma": float, "seed": int, "j": int, "p": float, "beta": float,
    "gamma": float, "eps": float, "horizon": int, "n_sims": int,
    "init_fraction": float, "damping": float,
}


def _parse_objective(parser, problems) -> dict:
    if not parser.has_section("objective"):
        problems.append("[objective] section is required")
        return {}
    section = dict(parser.items("objective"))
    kind = section.pop("kind", None)
    out = {"kind": kind}
    if kind not in OBJECTIVE_KINDS:
        problems.append(f"[objective] kind must be one of {OBJECTIVE_KINDS}, got {kind!r}")
        return out
    for key, raw in section.items():
        typ = _OBJECTIVE_PARAM_TYPES.get(key)
        if typ is None:
            problems.append(f"[objective] unknown key {key!r}")
            continue
        out[key] = _parse_typed("objective", key, raw, typ, problems)
    return out


def _parse_run(parser, problems) -> dict:
    out = {}
    if not parser.has_section("run"):
        problems.append("[run] section is required")
        return {"k": 1}
    section = dict(parser.items("run"))
    if "k" not in section:
        problems.append("[run] k is required")
    mapping = {
        "k": ("k", int), "t": ("T", int), "q": ("Q", int),
        "failtol": ("failtol", int), "l_max": ("l_max", float),
        "restart_method": ("restart_method", str), "init_method": ("init_method", str),
        "n_init": ("n_init", int), "kernel": ("kernel", str),
        "fit_restarts": ("fit_restarts", int), "fit_maxfun": ("fit_maxfun", int),
        "refit_every": ("refit_every", int),
        "n_seeds": ("n_seeds", int), "seed": ("base_seed", int),
    }
    for key, raw in section.items():
        if key not in mapping:
            problems.append(f"[run] unknown key {key!r}")
            continue
        field_name, typ = mapping[key]
        if key == "l_max" and raw.strip() == "":
            out["l_max"] = math.inf
            continue
        value = _parse_typed("run", key, raw, typ, problems)
        if value is not None:
            out[field_name] = value
    return out


def _parse_methods(parser, problems) -> list[MethodSpec]:
    methods: list[MethodSpec] = []
    for section in parser.sections():
        if not section.startswith("method:"):
            continue
        name = section.split(":", 1)[1].strip()
        if name not in METHOD_NAMES:
            problems.append(f"[{section}] unknown method {name!r}; choose from {METHOD_NAMES}")
            continue
        overrides = {}
        for key, raw in parser.items(section):
            key_l = key.lower()
            if key_l not in _RUN_KEYS:
                problems.append(f"[{section}] {key}: not an overridable run key")
                continue
            target = "T" if key_l == "t" else "Q" if key_l == "q" else key_l
            value = _parse_typed(section, key, raw, _RUN_KEYS[key_l], problems)
            if value is not None:
                overrides[target] = value
        methods.append(MethodSpec(name=name, overrides=overrides))
    if not methods:
        problems.append("at least one [method:NAME] section is required")
    return methods


def _validate(config: ExperimentConfig, problems: list[str]) -> None:
    if config.k < 1:
        problems.append(f"[run] k must be >= 1, got {config.k}")
    if config.T < 1:
        problems.append(f"[run] t must be >= 1, got {config.T}")
    if config.Q < 1:
        problems.append(f"[run] q must be >= 1, got {config.Q}")
    if config.failtol < 1:
        problems.append(f"[run] failtol must be >= 1, got {config.failtol}")
    if config.n_seeds < 1:
        problems.append(f"[run] n_seeds must be >= 1, got {config.n_seeds}")
    if config.restart_method not in RESTART_METHODS:
        problems.append(f"[run] restart_method must be one of {RESTART_METHODS}")
    if config.init_method not in INIT_METHODS:
        problems.append(f"[run] init_method must be one of {INIT_METHODS}")
    if config.init_method != "none" and config.n_init < 1:
        problems.append("[run] n_init must be >= 1 when init_method is not 'none'")
    if config.kernel not in KERNEL_NAMES:
        problems.append(f"[run] kernel must be one of {KERNEL_NAMES}")
    kind = config.objective.get("kind")
    if kind == "ackley_grid" and config.graph.get("kind") != "grid":
        problems.append("[objective] ackley_grid requires a grid graph")
