"""Run traces: per-iteration rows, JSONL persistence, and summary tables."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

from .errors import SchemaMismatch

SCHEMA_VERSION = 1


@dataclass
class RunRow:
    t: int
    subset: tuple[int, ...]
    y: float
    best_y: float
    incumbent: tuple[int, ...]
    explored: int
    revealed: int
    distance_from_start: int
    center_moved: bool
    restarted: bool
    hyperparameters: dict | None = None

    def to_json_dict(self, labels: Sequence | None = None) -> dict:
        def mapped(subset: tuple[int, ...]) -> list:
            if labels is None:
                return list(subset)
            return [labels[v] for v in subset]

        return {
            "schema_version": SCHEMA_VERSION,
            "t": self.t,
            "subset": mapped(self.subset),
            "y": self.y,
            "best_y": self.best_y,
            "incumbent": mapped(self.incumbent),
            "explored": self.explored,
            "revealed": self.revealed,
            "distance_from_start": self.distance_from_start,
            "center_moved": self.center_moved,
            "restarted": self.restarted,
            "hyperparameters": self.hyperparameters,
        }


@dataclass
class RunRecord:
    """Complete trace of one run: exactly T search rows plus the
    initialization query log (kept separate from the budgeted rows)."""

    method: str
    seed: int
    rows: list[RunRow] = field(default_factory=list)
    init_queries: list[tuple[tuple[int, ...], float]] = field(default_factory=list)
    start: tuple[int, ...] | None = None

    @property
    def best_y(self) -> float:
        return self.rows[-1].best_y if self.rows else -math.inf

    @property
    def final_incumbent(self) -> tuple[int, ...] | None:
        return self.rows[-1].incumbent if self.rows else None

    def best_y_curve(self) -> np.ndarray:
        return np.array([row.best_y for row in self.rows])


def write_jsonl(record: RunRecord, sink: IO[str], labels: Sequence | None = None) -> None:
    for row in record.rows:
        sink.write(json.dumps(row.to_json_dict(labels), sort_keys=True))
        sink.write("\n")


def write_jsonl_atomic(record: RunRecord, path: Path, labels: Sequence | None = None) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w") as handle:
        write_jsonl(record, handle, labels)
    os.replace(tmp, path)


def read_jsonl(source: IO[str], path_hint: str = "<stream>") -> list[dict]:
    rows = []
    for i, line in enumerate(source, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaMismatch(f"{path_hint}:{i}: invalid JSON ({exc})") from None
        if row.get("schema_version") != SCHEMA_VERSION:
            raise SchemaMismatch(
                f"{path_hint}:{i}: schema_version {row.get('schema_version')} != {SCHEMA_VERSION}"
            )
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# Aggregation
# ---------------------------------------------------------------------------

def _mean_stderr(values: np.ndarray) -> tuple[float, float]:
    mean = float(values.mean())
    if len(values) < 2:
        return mean, 0.0
    return mean, float(values.std(ddof=1) / math.sqrt(len(values)))


def summarize_curves(rows_by_seed: list[list[dict]], ground_truth: float | None = None
                     ) -> list[dict]:
    """Per-t mean and standard error across seeds of best_y (and regret when
    ground truth is known), plus recorder series means."""
    lengths = {len(rows) for rows in rows_by_seed}
    if len(lengths) != 1:
        raise SchemaMismatch(f"runs have differing lengths: {sorted(lengths)}")
    (t_len,) = lengths
    out = []
    for i in range(t_len):
        best = np.array([rows[i]["best_y"] for rows in rows_by_seed])
        explored = np.array([rows[i]["explored"] for rows in rows_by_seed], dtype=float)
        revealed = np.array([rows[i]["revealed"] for rows in rows_by_seed], dtype=float)
        dist = np.array([rows[i]["distance_from_start"] for rows in rows_by_seed], dtype=float)
        mean, stderr = _mean_stderr(best)
        entry = {
            "t": rows_by_seed[0][i]["t"],
            "best_y_mean": mean,
            "best_y_stderr": stderr,
            "explored_mean": float(explored.mean()),
            "revealed_mean": float(revealed.mean()),
            "distance_mean": float(dist.mean()),
        }
        if ground_truth is not None:
            regret = ground_truth - best
            rmean, rstderr = _mean_stderr(regret)
            entry["regret_mean"] = rmean
            entry["regret_stderr"] = rstderr
        out.append(entry)
    return out


SUMMARY_COLUMNS = [
    "method", "t", "best_y_mean", "best_y_stderr", "regret_mean", "regret_stderr",
    "explored_mean", "revealed_mean", "distance_mean",
]


def write_summary_csv(sink: IO[str], summaries: dict[str, list[dict]]) -> None:
    """Long-format CSV: one row per (method, t)."""
    sink.write(",".join(SUMMARY_COLUMNS) + "\n")
    for method in sorted(summaries):
        for entry in summaries[method]:
            cells = [method]
            for col in SUMMARY_COLUMNS[1:]:
                value = entry.get(col, "")
                cells.append(repr(value) if isinstance(value, float) else str(value))
            sink.write(",".join(cells) + "\n")
