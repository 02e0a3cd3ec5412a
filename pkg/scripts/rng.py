"""Seeded random number generation for reproducible Monte Carlo.

All randomness flows through an explicitly passed numpy Generator.
Parallel work gets its own child generator via seed splitting; a single
generator is never shared between workers.
"""

from __future__ import annotations

import numpy as np

SEED_MASK = (1 << 64) - 1


def check_seed(seed: int) -> int:
    """Validate a 64-bit unsigned seed."""
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be an integer, got {type(seed).__name__}")
    seed = int(seed)
    if seed < 0 or seed > SEED_MASK:
        raise ValueError(f"seed must fit in 64 unsigned bits, got {seed}")
    return seed


def make_rng(seed: int) -> np.random.Generator:
    """Create a PCG64 generator from a 64-bit seed."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(check_seed(seed))))


def split_seeds(seed: int, n: int) -> list[np.random.Generator]:
    """Spawn n independent generators from one seed.

    Child i depends only on (seed, i), so results do not depend on how
    many workers consume the children.
    """
    children = np.random.SeedSequence(check_seed(seed)).spawn(n)
    return [np.random.Generator(np.random.PCG64(child)) for child in children]
