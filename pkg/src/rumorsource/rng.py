"""Seeded random streams.

Every stochastic routine takes an explicit integer seed.  Streams are numpy's
PCG64 bit generator keyed through ``SeedSequence``; per-trial streams use the
``spawn_key`` mechanism, so trial ``i`` of a run always sees the same numbers
no matter how many trials the run has or which worker executes it.

Kernels consume uniforms in fixed-size blocks from a :class:`UniformStream`.
Both kernel backends draw in the same order, so a given seed yields the same
trace whichever backend is active.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError

BLOCK_SIZE = 1024

# spawn_key purposes
SPREAD = 0
TIEBREAK = 1
GUESS = 2
HOST = 3
SOURCE = 4


def _check_seed(seed) -> int:
    if isinstance(seed, (bool, np.bool_)) or not isinstance(seed, (int, np.integer)):
        raise DomainError(f"seed must be a non-negative integer, got {seed!r}")
    if seed < 0:
        raise DomainError(f"seed must be a non-negative integer, got {seed}")
    return int(seed)


def make_generator(seed: int, *key: int) -> np.random.Generator:
    """PCG64 generator for ``seed`` and an optional spawn key path."""
    seed = _check_seed(seed)
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def trial_generator(master_seed: int, trial_id: int, purpose: int = SPREAD) -> np.random.Generator:
    return make_generator(master_seed, trial_id, purpose)


def derive_seed(master_seed: int, *key: int) -> int:
    """A 63-bit integer seed derived from ``master_seed`` and a key path."""
    seed = _check_seed(master_seed)
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


class UniformStream:
    """Blocks of U[0,1) doubles pulled lazily from a generator."""

    __slots__ = ("generator", "size")

    def __init__(self, generator: np.random.Generator, size: int = BLOCK_SIZE):
        self.generator = generator
        self.size = size

    @classmethod
    def from_seed(cls, seed: int, *key: int) -> "UniformStream":
        return cls(make_generator(seed, *key))

    def block(self) -> np.ndarray:
        return self.generator.random(self.size)
