"""Deterministic RNG derivation: every random stream hangs off one seed."""

from __future__ import annotations

import numpy as np


def derived_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for (seed, key); stable across runs and platforms."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


# spawn-key namespaces used by model construction and training
INIT, SAMPLING, DROPOUT, DATA = 0, 1, 2, 3
