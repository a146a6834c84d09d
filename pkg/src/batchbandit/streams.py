"""Deterministic random-stream derivation for parallel simulation.

Every stream is keyed by (root seed, integer path). Streams with distinct
paths are statistically independent and their derivation does not depend on
the order in which they are created, so replications can run on any number
of workers and still reproduce bit-identical results.
"""

from __future__ import annotations

import numpy as np


def child_sequence(root_seed: int, *path: int) -> np.random.SeedSequence:
    """SeedSequence for the stream addressed by ``path`` under ``root_seed``."""
    return np.random.SeedSequence(entropy=root_seed, spawn_key=tuple(path))


def stream(root_seed: int, *path: int) -> np.random.Generator:
    """Generator for the stream addressed by ``path`` under ``root_seed``."""
    return np.random.default_rng(child_sequence(root_seed, *path))
