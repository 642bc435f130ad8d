"""Deterministic, platform-independent random generators.

All randomness in the package flows through :func:`keyed_rng`, a counter-based
Philox generator keyed by a tuple of integers, so corpora and experiments are
reproducible bit for bit across machines and across runs.
"""

from __future__ import annotations

import numpy as np

__all__ = ["keyed_rng", "derive_seed"]

_MASK64 = (1 << 64) - 1


def keyed_rng(*key_parts: int) -> np.random.Generator:
    """Counter-based generator keyed by the given integers."""
    entropy = [int(part) & _MASK64 for part in key_parts]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def derive_seed(*key_parts: int) -> int:
    """Collapse a key tuple into a single reproducible 64-bit seed."""
    entropy = [int(part) & _MASK64 for part in key_parts]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])
