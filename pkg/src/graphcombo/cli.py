"""Command-line entry point.

Subcommands: generate, run, sweep, kernel-validate, smoothness,
ground-truth, summarize.  Exit codes: 0 success, 2 configuration error,
3 runtime failure.  GRAPHCOMBO_OUT and GRAPHCOMBO_JOBS override the
output directory and parallelism.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from .config import load_config
from .errors import ConfigError, GraphComboError
from .runner import (cmd_generate, cmd_ground_truth, cmd_kernel_validate,
                     cmd_run, cmd_smoothness, cmd_summarize, cmd_sweep)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="experiment config file")
    parser.add_argument("--out", default=None, help="output directory override")
    parser.add_argument("--jobs", type=int, default=None,
                        help="parallel worker processes (default: CPU count)")
    parser.add_argument("--seed", type=int, default=None, help="base seed override")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphcombo",
        description="Bayesian optimization over node subsets on graphs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute all (method x seed) cells")
    _add_common(run)

    sweep = sub.add_parser("sweep", help="cartesian sweep over [sweep] axes")
    _add_common(sweep)

    validate = sub.add_parser("kernel-validate", help="kernel validation protocol")
    _add_common(validate)

    smoothness = sub.add_parser("smoothness", help="spectral smoothness curves")
    _add_common(smoothness)

    truth = sub.add_parser("ground-truth", help="exact optimum when computable")
    _add_common(truth)

    summarize = sub.add_parser("summarize", help="rebuild summary.csv for a run dir")
    summarize.add_argument("run_dir", help="directory produced by `run`")

    generate = sub.add_parser("generate", help="write the configured graph as an edge list")
    generate.add_argument("--config", required=True)
    generate.add_argument("--out", required=True, help="edge-list output path")
    return parser


def _resolve_jobs(value: int | None) -> int:
    if value is not None:
        return max(1, value)
    env = os.environ.get("GRAPHCOMBO_JOBS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _resolve_out(value: str | None) -> str | None:
    return value if value is not None else os.environ.get("GRAPHCOMBO_OUT")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "summarize":
            path = cmd_summarize(args.run_dir)
            print(f"wrote {path}")
            return EXIT_OK
        config = load_config(args.config)
        if getattr(args, "seed", None) is not None:
            config = replace(config, base_seed=args.seed)
        if args.command == "generate":
            path = cmd_generate(config, args.out)
            print(f"wrote {path}")
            return EXIT_OK
        out = _resolve_out(args.out)
        if args.command == "run":
            directory = cmd_run(config, out, jobs=_resolve_jobs(args.jobs))
            print(f"run artifacts in {directory}")
        elif args.command == "sweep":
            directory = cmd_sweep(config, out, jobs=_resolve_jobs(args.jobs))
            print(f"sweep artifacts in {directory}")
        elif args.command == "kernel-validate":
            path = cmd_kernel_validate(config, out)
            print(f"wrote {path}")
        elif args.command == "smoothness":
            path = cmd_smoothness(config, out)
            print(f"wrote {path}")
        elif args.command == "ground-truth":
            value, subset, path = cmd_ground_truth(config, out)
            if value is None:
                print("ground truth unavailable for this objective")
                return EXIT_RUNTIME
            print(f"optimum {value!r} at subset {list(subset)} (details in {path})")
        return EXIT_OK
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_CONFIG
    except GraphComboError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
