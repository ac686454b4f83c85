"""Seed-addressed random streams and the elementary samplers.

Every stream is a Philox generator whose 128-bit key is derived from a
master seed and a structural label, e.g. ``("corner", "xi", block)``.  The
same ``(master_seed, key)`` pair always yields the same stream, no matter
how many other streams were drawn before it.  Models use this to resample
a subset of their randomness (surgery) while leaving the rest bit-exact.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

__all__ = [
    "SeedSpec",
    "Streams",
    "stream",
    "poisson_point_process",
    "sample_poisson",
    "sample_signed_bernoulli",
    "sample_uniform",
    "block_draw",
]

_MASK64 = (1 << 64) - 1


def _key_digest(master_seed: int, key: Sequence[Hashable]) -> tuple[int, int]:
    text = repr((int(master_seed) & _MASK64, tuple(key))).encode()
    digest = hashlib.blake2b(text, digest_size=16).digest()
    return (
        int.from_bytes(digest[:8], "little"),
        int.from_bytes(digest[8:], "little"),
    )


@dataclass(frozen=True)
class SeedSpec:
    """A master seed plus a structural stream label."""

    master_seed: int
    stream_key: tuple = ()

    def __post_init__(self):
        if not 0 <= int(self.master_seed) <= _MASK64:
            raise ValueError("master_seed must fit in an unsigned 64-bit integer")

    def child(self, *key: Hashable) -> "SeedSpec":
        return SeedSpec(self.master_seed, self.stream_key + tuple(key))

    def generator(self) -> np.random.Generator:
        k0, k1 = _key_digest(self.master_seed, self.stream_key)
        return np.random.Generator(np.random.Philox(key=np.array([k0, k1], dtype=np.uint64)))


def stream(master_seed: int, *key: Hashable) -> np.random.Generator:
    """Return the generator addressed by ``(master_seed, key)``."""
    return SeedSpec(int(master_seed), tuple(key)).generator()


class Streams:
    """Factory of keyed generators sharing one master seed.

    >>> s = Streams(7)
    >>> float(s("a", 1).random()) == float(s("a", 1).random())
    True
    """

    def __init__(self, master_seed: int, prefix: tuple = ()):
        self.master_seed = int(master_seed) & _MASK64
        self.prefix = tuple(prefix)

    def __call__(self, *key: Hashable) -> np.random.Generator:
        return stream(self.master_seed, *(self.prefix + key))

    def sub(self, *key: Hashable) -> "Streams":
        return Streams(self.master_seed, self.prefix + key)

    def __repr__(self):
        return f"Streams(master_seed={self.master_seed}, prefix={self.prefix!r})"


BLOCK = 4096


def block_draw(streams: Streams, key: tuple, lo: int, hi: int, draw) -> np.ndarray:
    """Draw one value per integer index in ``[lo, hi)``.

    Indices are grouped into aligned blocks of ``BLOCK``; block ``b`` comes
    from the stream ``key + (b,)`` so the value attached to an index never
    depends on the requested range.  ``draw(gen, size)`` produces a block.
    """
    if hi <= lo:
        return draw(streams(*key, 0), 0)
    b0, b1 = lo // BLOCK, (hi - 1) // BLOCK
    parts = [draw(streams(*key, b), BLOCK) for b in range(b0, b1 + 1)]
    full = np.concatenate(parts)
    start = lo - b0 * BLOCK
    return full[start:start + (hi - lo)]


def poisson_point_process(gen: np.random.Generator, rate: float, horizon: float) -> np.ndarray:
    """Ring times of a homogeneous Poisson process on ``(0, horizon]``."""
    if rate <= 0:
        raise ValueError("rate must be positive")
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    if horizon == 0:
        return np.empty(0)
    count = gen.poisson(rate * horizon)
    # uniform on [0,1) -> (0, horizon]
    times = horizon * (1.0 - gen.random(count))
    times.sort()
    # duplicates have probability ~0 but floats can collide; drop them
    if count > 1:
        keep = np.empty(count, dtype=bool)
        keep[0] = True
        np.greater(times[1:], times[:-1], out=keep[1:])
        times = times[keep]
    return times


def sample_poisson(gen: np.random.Generator, lam: float, size=None):
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    return gen.poisson(lam, size=size)


def sample_signed_bernoulli(gen: np.random.Generator, p: float, size=None):
    """+1 with probability ``p``, -1 otherwise."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    u = gen.random(size)
    return np.where(u < p, 1, -1).astype(np.int8) if size is not None else (1 if u < p else -1)


def sample_uniform(gen: np.random.Generator, size=None):
    return gen.random(size)
