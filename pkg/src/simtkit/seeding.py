"""Named, derivable random streams so every pipeline stage is reproducible."""

from __future__ import annotations

import hashlib

import numpy as np


def _name_entropy(name: str | int) -> int:
    digest = hashlib.sha256(str(name).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def stream(seed: int, *names: str | int) -> np.random.Generator:
    """Derive an independent generator from a root seed and a stream name.

    The same (seed, names) always yields the same stream, on any platform.
    Distinct names yield statistically independent streams, so corpus items
    can be processed in any order or in parallel without changing results.
    """
    entropy = [seed] + [_name_entropy(n) for n in names]
    return np.random.default_rng(np.random.SeedSequence(entropy))
