"""
Counter-based random streams.

Every stream is a ``numpy.random.Philox`` generator keyed by the pair
``(seed mod 2**64, stream index)`` with the counter starting at zero, so any
implementation of Philox-4x64-10 reproduces the same numbers from the same
pair. Stream indices are listed in :class:`degflow.enums.Stream`.
"""

import numpy as np

from degflow.enums import Stream

_U64 = 2**64


def rng(seed: int, stream: int = Stream.DEFAULT) -> np.random.Generator:
    """Returns the generator for ``(seed, stream)``."""
    key = np.array([int(seed) % _U64, int(stream) % _U64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def derive_seed(seed: int, *path: int) -> int:
    """Derives a child seed from ``seed`` and an index path, e.g. (step, item)."""
    entropy = [int(seed) % _U64, *(int(i) % _U64 for i in path)]
    state = np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint64)
    return int(state[0] >> np.uint64(1))


def randn(
    shape, seed: int, stream: int = Stream.NOISE, dtype=np.float32
) -> np.ndarray:
    """Standard-normal samples, identical for identical ``(shape, seed, stream)``.

    Samples are always drawn in float64 and cast, so the float32 and float64
    streams agree up to rounding.
    """
    shape = tuple(int(s) for s in shape)
    if len(shape) == 0:
        raise ValueError("randn needs a non-empty shape")
    if any(s <= 0 for s in shape):
        raise ValueError(f"randn shape has a zero-sized dimension: {shape}")
    return rng(seed, stream).standard_normal(shape).astype(dtype)
