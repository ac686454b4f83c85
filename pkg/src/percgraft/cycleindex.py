"""Cycle partition of a permutation kept as a forest of implicit-key treaps.

Each cycle ``(w, pi(w), pi^2(w), ...)`` is stored as the in-order sequence of
one treap.  Left-composing the permutation with a transposition either
splits one cycle into two or concatenates two cycles, and both are a
constant number of treap splits and merges.

Nodes are vertex ids; ``NIL`` is an extra sentinel slot with size 0 so the
hot loops never branch on ``-1``.
"""
from __future__ import annotations

from collections import Counter

import numpy as np

__all__ = ["CycleIndex", "InvalidTransposition"]


class InvalidTransposition(ValueError):
    pass


class CycleIndex:
    """Cycle partition of ``{0, ..., n-1}`` supporting transpositions.

    Starts from the identity permutation (``n`` singleton cycles).
    Priorities come from ``rng`` so tree shapes are reproducible.
    """

    def __init__(self, n: int, rng: np.random.Generator):
        self.n = n
        nil = n
        self.NIL = nil
        self.left = [nil] * (n + 1)
        self.right = [nil] * (n + 1)
        self.parent = [nil] * (n + 1)
        self.size = [1] * n + [0]
        self.prio = rng.random(n).tolist() + [-1.0]

    # -- treap primitives -------------------------------------------------

    def _pull(self, t):
        self.size[t] = self.size[self.left[t]] + self.size[self.right[t]] + 1

    def _split(self, t, k):
        """Split tree ``t`` into its first ``k`` nodes and the rest."""
        nil = self.NIL
        if t == nil:
            return nil, nil
        left, right, parent = self.left, self.right, self.parent
        ls = self.size[left[t]]
        if k <= ls:
            a, b = self._split(left[t], k)
            left[t] = b
            parent[b] = t
            self._pull(t)
            return a, t
        a, b = self._split(right[t], k - ls - 1)
        right[t] = a
        parent[a] = t
        self._pull(t)
        return t, b

    def _merge(self, a, b):
        nil = self.NIL
        if a == nil:
            return b
        if b == nil:
            return a
        if self.prio[a] > self.prio[b]:
            r = self._merge(self.right[a], b)
            self.right[a] = r
            self.parent[r] = a
            self._pull(a)
            return a
        l = self._merge(a, self.left[b])
        self.left[b] = l
        self.parent[l] = b
        self._pull(b)
        return b

    def split(self, t, k):
        a, b = self._split(t, k)
        self.parent[a] = self.parent[b] = self.NIL
        return a, b

    def merge(self, a, b):
        r = self._merge(a, b)
        self.parent[r] = self.NIL
        return r

    def root(self, v) -> int:
        parent, nil = self.parent, self.NIL
        while parent[v] != nil:
            v = parent[v]
        return v

    def index(self, v) -> int:
        """In-order position of ``v`` inside its own tree."""
        left, parent, size, nil = self.left, self.parent, self.size, self.NIL
        i = size[left[v]]
        while parent[v] != nil:
            p = parent[v]
            if self.right[p] == v:
                i += size[left[p]] + 1
            v = p
        return i

    def _rotate_to_front(self, v):
        r = self.root(v)
        i = self.index(v)
        if i == 0:
            return r
        a, b = self.split(r, i)
        return self.merge(b, a)

    # -- public API -------------------------------------------------------

    def apply_transposition(self, u: int, v: int) -> None:
        """Replace ``pi`` by ``tau_{u,v} o pi`` in place."""
        if u == v:
            raise InvalidTransposition(f"transposition needs two distinct vertices, got {u}")
        if self.root(u) == self.root(v):
            t = self._rotate_to_front(u)
            self.split(t, self.index(v))
        else:
            tu = self._rotate_to_front(u)
            tv = self._rotate_to_front(v)
            self.merge(tu, tv)

    def same_cycle(self, u: int, v: int) -> bool:
        return self.root(u) == self.root(v)

    def cycle_length(self, v: int) -> int:
        return self.size[self.root(v)]

    def _inorder(self, t) -> list:
        out, stack, nil = [], [], self.NIL
        left, right = self.left, self.right
        while stack or t != nil:
            while t != nil:
                stack.append(t)
                t = left[t]
            t = stack.pop()
            out.append(t)
            t = right[t]
        return out

    def cycle_of(self, v: int) -> list:
        """Orbit of ``v`` in cyclic order, starting at ``v``."""
        seq = self._inorder(self.root(v))
        i = self.index(v)
        return seq[i:] + seq[:i]

    def roots(self) -> list:
        nil = self.NIL
        return [v for v in range(self.n) if self.parent[v] == nil]

    def cycles(self) -> list:
        return [self._inorder(r) for r in self.roots()]

    def cycle_length_histogram(self) -> dict:
        return dict(sorted(Counter(self.size[r] for r in self.roots()).items()))

    def labels(self) -> np.ndarray:
        """Root id of every vertex's cycle."""
        return np.array([self.root(v) for v in range(self.n)], dtype=np.int64)

    def to_permutation(self) -> np.ndarray:
        """Forward map recovered from the cyclic orders."""
        fwd = np.empty(self.n, dtype=np.int64)
        for cyc in self.cycles():
            fwd[cyc] = cyc[1:] + cyc[:1]
        return fwd
