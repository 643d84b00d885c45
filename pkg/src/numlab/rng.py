"""SplitMix64 with explicit state threading.

Every draw takes a state and returns ``(value, next_state)``; nothing is
mutated and there is no module-level generator, so a run is fully
determined by its seed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


@dataclass(frozen=True)
class RngState:
    state: int = 0

    def __post_init__(self):
        object.__setattr__(self, "state", int(self.state) & MASK64)


def seed(value: int) -> RngState:
    return RngState(value)


def next_u64(rng: RngState) -> tuple[int, RngState]:
    s = (rng.state + GOLDEN_GAMMA) & MASK64
    z = s
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31), RngState(s)


def next_real(rng: RngState) -> tuple[float, RngState]:
    """Uniform double on the 53-bit grid in [0, 1)."""
    bits, rng = next_u64(rng)
    return (bits >> 11) * 2.0**-53, rng


def uniform_vector(n: int, rng: RngState) -> tuple[np.ndarray, RngState]:
    out = np.empty(n)
    for i in range(n):
        out[i], rng = next_real(rng)
    return out, rng


def random_matrix(n: int, rng: RngState) -> tuple[np.ndarray, RngState]:
    """n-by-n matrix of next_real draws, filled row-major."""
    if n < 1:
        raise ValueError("n must be positive")
    values, rng = uniform_vector(n * n, rng)
    return values.reshape(n, n), rng


def derive_seeds(master: int, count: int) -> list[int]:
    """Per-task seeds: task k gets the k-th next_u64 output of ``master``."""
    rng = RngState(master)
    seeds = []
    for _ in range(count):
        value, rng = next_u64(rng)
        seeds.append(value)
    return seeds
