"""Interchange process (random stirring) run to a fixed time.

Particles sit on vertices.  Every edge carries an independent unit-rate
Poisson clock; when it rings the occupants of its two endpoints swap.  The
resulting permutation maps start position to end position, so each ring
left-composes the current permutation with a transposition.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .cycleindex import CycleIndex
from .lattice import LatticeGraph
from .randomness import Streams, poisson_point_process

__all__ = [
    "ClockTimeline",
    "Permutation",
    "generate_timeline",
    "run_interchange",
    "apply_transposition",
    "cycle_of",
    "cycle_length_histogram",
    "permutation_sign",
    "orbits",
    "sample_permutation",
]


@dataclass(frozen=True)
class ClockTimeline:
    beta: float
    rings: tuple  # one sorted float array per edge

    def __post_init__(self):
        for t in self.rings:
            if len(t) and (t[-1] > self.beta or t[0] <= 0 or np.any(np.diff(t) <= 0)):
                raise ValueError("ring times must be strictly increasing in (0, beta]")

    @property
    def total_rings(self) -> int:
        return int(sum(len(t) for t in self.rings))

    def events(self) -> tuple[np.ndarray, np.ndarray]:
        """All rings as ``(times, edge_ids)`` sorted by time, then edge id."""
        counts = [len(t) for t in self.rings]
        times = np.concatenate(self.rings) if self.rings else np.empty(0)
        eids = np.repeat(np.arange(len(self.rings)), counts)
        order = np.lexsort((eids, times))
        return times[order], eids[order]


@dataclass
class Permutation:
    forward: np.ndarray
    inverse: np.ndarray

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(np.arange(n), np.arange(n))

    @classmethod
    def from_forward(cls, fwd) -> "Permutation":
        fwd = np.asarray(fwd, dtype=np.int64)
        inv = np.empty_like(fwd)
        inv[fwd] = np.arange(len(fwd))
        return cls(fwd, inv)

    def __len__(self):
        return len(self.forward)

    def __call__(self, v):
        return self.forward[v]

    def swap_positions(self, u: int, v: int) -> None:
        """Left-compose with the transposition of positions ``u`` and ``v``."""
        inv, fwd = self.inverse, self.forward
        a, b = inv[u], inv[v]
        inv[u], inv[v] = b, a
        fwd[a], fwd[b] = v, u

    def is_bijection(self) -> bool:
        n = len(self.forward)
        return (np.array_equal(np.sort(self.forward), np.arange(n))
                and np.array_equal(self.inverse[self.forward], np.arange(n)))


def generate_timeline(g: LatticeGraph, beta: float, streams: Streams) -> ClockTimeline:
    """One unit-rate clock per edge, each from its own stream ``("clock", e)``."""
    if beta < 0:
        raise ValueError("beta must be non-negative")
    rings = tuple(
        poisson_point_process(streams("clock", e), 1.0, beta)
        for e in range(g.edge_count)
    )
    return ClockTimeline(float(beta), rings)


def run_interchange(g: LatticeGraph, timeline: ClockTimeline, streams: Streams | None = None,
                    *, on_event=None, check_every_event: bool = False):
    """Apply every ring in time order; return ``(Permutation, CycleIndex)``.

    ``on_event(k, u, v, perm, index)`` is called after each ring, which is
    how the oracle tests compare against brute-force orbits.
    """
    if len(timeline.rings) != g.edge_count:
        raise ValueError("timeline does not match the graph's edge count")
    streams = streams or Streams(0)
    perm = Permutation.identity(g.vertex_count)
    idx = CycleIndex(g.vertex_count, streams("interchange", "treap"))
    _, eids = timeline.events()
    ends = g.edges
    for k, e in enumerate(eids.tolist()):
        u, v = int(ends[e, 0]), int(ends[e, 1])
        perm.swap_positions(u, v)
        idx.apply_transposition(u, v)
        if check_every_event and not perm.is_bijection():
            raise AssertionError(f"permutation lost bijectivity at event {k}")
        if on_event is not None:
            on_event(k, u, v, perm, idx)
    if not perm.is_bijection():
        raise AssertionError("final permutation is not a bijection")
    return perm, idx


def apply_transposition(idx: CycleIndex, u: int, v: int) -> CycleIndex:
    idx.apply_transposition(u, v)
    return idx


def cycle_of(idx: CycleIndex, v: int) -> list:
    return idx.cycle_of(v)


def cycle_length_histogram(idx: CycleIndex) -> dict:
    return idx.cycle_length_histogram()


def orbits(forward) -> list:
    """Brute-force orbit decomposition, each orbit starting at its minimum."""
    fwd = list(map(int, forward))
    seen = [False] * len(fwd)
    out = []
    for s in range(len(fwd)):
        if seen[s]:
            continue
        orb = []
        v = s
        while not seen[v]:
            seen[v] = True
            orb.append(v)
            v = fwd[v]
        out.append(orb)
    return out


def permutation_sign(perm) -> int:
    """Sign from the cycle type: ``(-1) ** (n - #cycles)``."""
    fwd = perm.forward if isinstance(perm, Permutation) else perm
    return -1 if (len(fwd) - len(orbits(fwd))) % 2 else 1


def histogram_from_orbits(orbs) -> dict:
    return dict(sorted(Counter(len(o) for o in orbs).items()))


def longest_cycles(idx: CycleIndex, k: int = 2) -> list:
    """The ``k`` longest cycles (ties broken by smallest root id)."""
    roots = sorted(idx.roots(), key=lambda r: (-idx.size[r], r))[:k]
    return [idx.cycle_of(min(idx._inorder(r))) for r in roots]


def sample_permutation(g: LatticeGraph, beta: float, gen: np.random.Generator) -> np.ndarray:
    """Forward map of the interchange permutation at time ``beta`` from a
    single generator.

    Same law as :func:`run_interchange` (the superposition of the edge
    clocks is a rate-``|E|`` process with uniform edge marks) but without a
    per-edge stream or cycle index; used for bulk sampling.
    """
    k = gen.poisson(beta * g.edge_count)
    eids = gen.integers(0, g.edge_count, size=k)
    inv = list(range(g.vertex_count))
    ends = g.edges[eids].tolist()
    for u, v in ends:
        inv[u], inv[v] = inv[v], inv[u]
    fwd = np.empty(g.vertex_count, dtype=np.int64)
    fwd[np.asarray(inv)] = np.arange(g.vertex_count)
    return fwd
