"""Labeled, reproducible random-stream derivation.

Every stochastic component draws from a generator derived from a base seed
plus string labels (method name, role, replica index, ...).  Labels are
hashed with SHA-256 so derivation is stable across processes and Python
versions; adding a new labeled stream never perturbs existing ones.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _label_words(label: str | int) -> list[int]:
    if isinstance(label, int):
        return [label & 0xFFFFFFFF, (label >> 32) & 0xFFFFFFFF]
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    return [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]


def seed_sequence(base_seed: int, *labels: str | int) -> np.random.SeedSequence:
    entropy: list[int] = [base_seed & 0xFFFFFFFFFFFFFFFF]
    for label in labels:
        entropy.extend(_label_words(label))
    return np.random.SeedSequence(entropy)


def derive_rng(base_seed: int, *labels: str | int) -> np.random.Generator:
    """Generator for the stream identified by (base_seed, labels)."""
    return np.random.default_rng(seed_sequence(base_seed, *labels))


def derive_seed(base_seed: int, *labels: str | int) -> int:
    """Plain integer seed for the stream (for APIs that take an int)."""
    return int(seed_sequence(base_seed, *labels).generate_state(1, np.uint64)[0])
