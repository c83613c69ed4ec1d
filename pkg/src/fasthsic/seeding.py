"""Deterministic seed derivation for Monte Carlo runs and permutations.

Every random stream in the package is a numpy ``PCG64`` generator whose
seed is derived from a base seed and a 64-bit key with the SplitMix64
finalizer. The finalizer is a bijection on 64-bit integers, so for a
fixed base seed distinct keys always yield distinct stream seeds.
"""
import numpy as np

MASK64 = (1 << 64) - 1


def splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(base: int, key: int) -> int:
    """Seed of stream ``key`` under ``base``; injective in ``key``."""
    return splitmix64(splitmix64(base & MASK64) ^ (key & MASK64))


def run_key(scenario: int, run: int) -> int:
    """Pack a (scenario, run) pair into one 64-bit key."""
    if not (0 <= scenario < 1 << 32 and 0 <= run < 1 << 32):
        raise ValueError("scenario and run indices must fit in 32 bits")
    return (scenario << 32) | run


def rng_for(base: int, key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_seed(base, key)))
