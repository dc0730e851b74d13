"""Named, splittable random streams derived from a single master seed.

Every stochastic component draws from its own substream keyed by a
(purpose, index...) path, so e.g. visibility sampling for grid ``k`` and
Monte Carlo trial ``t`` are independently reproducible and insensitive to
evaluation order or parallel scheduling.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _key(part: str | int) -> int:
    if isinstance(part, str):
        # Stable across processes/platforms, unlike hash().
        return int.from_bytes(hashlib.sha256(part.encode()).digest()[:8], "little")
    return int(part)


def substream(master_seed: int, *path: str | int) -> np.random.Generator:
    """Generator for the substream identified by ``path`` under ``master_seed``."""
    entropy = [int(master_seed)] + [_key(p) for p in path]
    return np.random.default_rng(np.random.SeedSequence(entropy))
