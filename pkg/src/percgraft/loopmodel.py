"""Loop O(n) model on finite patches.

A loop configuration is a set of edges in which every vertex has degree 0
or 2.  Its weight is ``x ** |omega| * n ** l(omega)`` with ``l`` the number
of loops.  Sampling uses single-face flips ``omega -> omega ^ face`` with a
Metropolis filter; the flip kernel is compiled with numba.

All weights are handled in the log domain.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba as nb
import numpy as np

from .lattice import LatticeGraph
from .randomness import Streams

__all__ = [
    "LoopConfig",
    "GibbsParams",
    "EnumerationInfeasible",
    "is_loop_config",
    "count_loops",
    "log_weight",
    "weight",
    "enumerate_exact",
    "finite_energy_bounds",
    "check_finite_energy_bound",
    "metropolis_flip",
    "LoopSampler",
    "count_trifurcations",
]


class EnumerationInfeasible(ValueError):
    pass


@dataclass(frozen=True)
class GibbsParams:
    x: float
    n: float
    # edges outside ``active`` are frozen at ``boundary``; None means all active
    boundary: np.ndarray | None = field(default=None, repr=False)
    active: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if not (self.x >= 0 and self.n >= 0 and math.isfinite(self.x) and math.isfinite(self.n)):
            raise ValueError("x and n must be finite and non-negative")


def _vertex_degrees(g: LatticeGraph, mask: np.ndarray) -> np.ndarray:
    deg = np.zeros(g.vertex_count, dtype=np.int64)
    e = g.edges[mask]
    np.add.at(deg, e[:, 0], 1)
    np.add.at(deg, e[:, 1], 1)
    return deg


def _as_mask(g: LatticeGraph, edges) -> np.ndarray:
    edges = np.asarray(edges)
    if edges.dtype == bool and edges.shape == (g.edge_count,):
        return edges.copy()
    mask = np.zeros(g.edge_count, dtype=bool)
    mask[np.asarray(list(edges), dtype=np.int64)] = True
    return mask


def is_loop_config(g: LatticeGraph, edges) -> bool:
    """Every vertex has degree 0 or 2 in the given edge set."""
    deg = _vertex_degrees(g, _as_mask(g, edges))
    return bool(np.all((deg == 0) | (deg == 2)))


def count_loops(g: LatticeGraph, mask: np.ndarray, active_vertices=None) -> int:
    """Connected components with at least one edge (union-find recount).

    With ``active_vertices`` only components meeting that vertex set count.
    """
    parent = list(range(g.vertex_count))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    touched = set()
    for u, v in g.edges[mask].tolist():
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
        touched.add(u)
    roots = {find(v) for v in touched}
    if active_vertices is not None:
        act = set(np.flatnonzero(active_vertices).tolist())
        comp = {}
        for v in range(g.vertex_count):
            comp.setdefault(find(v), []).append(v)
        roots = {r for r in roots if act.intersection(comp[r])}
    return len(roots)


class LoopConfig:
    """Edge bitset with cached degrees, edge count and loop count."""

    def __init__(self, g: LatticeGraph, edges=()):
        self.g = g
        self.mask = _as_mask(g, edges) if len(edges) or isinstance(edges, np.ndarray) \
            else np.zeros(g.edge_count, dtype=bool)
        self.degree = _vertex_degrees(g, self.mask)
        if not np.all((self.degree == 0) | (self.degree == 2)):
            raise ValueError("not a loop configuration: some vertex has degree 1, 3 or 4")
        self.edge_count = int(self.mask.sum())
        self.loop_count = count_loops(g, self.mask)

    def edges(self) -> list:
        return np.flatnonzero(self.mask).tolist()

    def flipped(self, face) -> "LoopConfig | None":
        """``omega ^ face`` if that is a loop configuration, else None."""
        m = self.mask.copy()
        m[list(face)] ^= True
        return LoopConfig(self.g, m) if is_loop_config(self.g, m) else None

    def consistent(self) -> bool:
        return (np.array_equal(self.degree, _vertex_degrees(self.g, self.mask))
                and self.edge_count == int(self.mask.sum())
                and self.loop_count == count_loops(self.g, self.mask))


def _log_term(k, w):
    if k == 0:
        return 0.0
    if w == 0:
        return -math.inf
    return k * math.log(w)


def log_weight(cfg: LoopConfig, params: GibbsParams) -> float:
    """``|omega| log x + l(omega) log n``; ``-inf`` for a zero weight."""
    if params.active is None:
        k, l = cfg.edge_count, cfg.loop_count
    else:
        act_e = params.active
        k = int((cfg.mask & act_e).sum())
        act_v = _vertex_degrees(cfg.g, act_e) > 0
        l = count_loops(cfg.g, cfg.mask, act_v)
    return _log_term(k, params.x) + _log_term(l, params.n)


def weight(cfg: LoopConfig, params: GibbsParams) -> float:
    return math.exp(log_weight(cfg, params))


def _enumerate_masks(g: LatticeGraph, allowed: np.ndarray, fixed: np.ndarray):
    """Backtracking over edges keeping every vertex degree <= 2 and never 1
    once all its edges are decided."""
    E = g.edge_count
    order = list(range(E))
    ends = g.edges.tolist()
    remaining = np.diff(g.indptr).tolist()
    deg = [0] * g.vertex_count
    chosen = fixed.copy()
    for e in np.flatnonzero(fixed).tolist():
        deg[ends[e][0]] += 1
        deg[ends[e][1]] += 1
    out = []

    def ok_after(u):
        return not (remaining[u] == 0 and deg[u] == 1)

    def rec(i):
        if i == E:
            out.append(chosen.copy())
            return
        e = order[i]
        u, v = ends[e]
        remaining[u] -= 1
        remaining[v] -= 1
        if not allowed[e]:
            if ok_after(u) and ok_after(v):
                rec(i + 1)
        else:
            # edge closed
            if ok_after(u) and ok_after(v):
                rec(i + 1)
            # edge open
            if deg[u] < 2 and deg[v] < 2:
                deg[u] += 1
                deg[v] += 1
                chosen[e] = True
                if ok_after(u) and ok_after(v):
                    rec(i + 1)
                chosen[e] = False
                deg[u] -= 1
                deg[v] -= 1
        remaining[u] += 1
        remaining[v] += 1

    rec(0)
    return out


def enumerate_exact(g: LatticeGraph, params: GibbsParams, max_edges: int = 24) -> list:
    """Exact distribution over all loop configurations of a small graph.

    Returns ``[(edge_ids_tuple, probability), ...]`` sorted by edge ids.
    """
    if g.edge_count > max_edges:
        raise EnumerationInfeasible(
            f"graph has {g.edge_count} edges; exact enumeration is capped at {max_edges}")
    if params.active is None:
        allowed = np.ones(g.edge_count, dtype=bool)
        fixed = np.zeros(g.edge_count, dtype=bool)
    else:
        allowed = params.active.copy()
        fixed = (params.boundary if params.boundary is not None
                 else np.zeros(g.edge_count, dtype=bool)) & ~allowed
    masks = _enumerate_masks(g, allowed, fixed)
    logs = np.array([log_weight(LoopConfig(g, m), params) for m in masks])
    finite = np.isfinite(logs)
    if not finite.any():
        raise ValueError("every configuration has zero weight")
    top = logs[finite].max()
    w = np.where(finite, np.exp(logs - top), 0.0)
    w /= w.sum()
    table = [(tuple(np.flatnonzero(m).tolist()), float(p)) for m, p in zip(masks, w)]
    return sorted(table)


def finite_energy_bounds(k: int, x: float, n: float) -> tuple[float, float]:
    """Log of ``min(x,1/x)^k min(n,1/n)^k`` and ``max(x,1/x)^k max(n,1/n)^k``."""
    if x <= 0 or n <= 0:
        raise ValueError("the finite-energy bounds need x > 0 and n > 0")
    span = k * (abs(math.log(x)) + abs(math.log(n)))
    return -span, span


def check_finite_energy_bound(cfg: LoopConfig, face, params: GibbsParams,
                              tol: float = 1e-12) -> bool:
    """Is ``P(omega ^ face) / P(omega)`` within the length-only bounds?"""
    other = cfg.flipped(face)
    if other is None:
        raise ValueError("omega ^ face is not a loop configuration")
    lr = log_weight(other, params) - log_weight(cfg, params)
    lo, hi = finite_energy_bounds(len(face), params.x, params.n)
    return lo - tol <= lr <= hi + tol


def metropolis_flip(cfg: LoopConfig, face, params: GibbsParams, rng: np.random.Generator):
    """One Metropolis step proposing ``omega ^ face``; returns the new state."""
    other = cfg.flipped(face)
    if other is None:
        return cfg
    lr = log_weight(other, params) - log_weight(cfg, params)
    if lr >= 0 or rng.random() < math.exp(lr):
        return other
    return cfg


# -- compiled sampler --------------------------------------------------------

@nb.njit(cache=True)
def _loops_through(state, verts, nverts, ends, indptr, inc, stamp, tag):
    """Distinct loops of ``state`` passing through any of ``verts``."""
    count = 0
    for a in range(nverts):
        v0 = verts[a]
        if stamp[v0] == tag:
            continue
        # degree check: isolated vertices carry no loop
        first = -1
        for j in range(indptr[v0], indptr[v0 + 1]):
            if state[inc[j]]:
                first = inc[j]
                break
        if first < 0:
            continue
        count += 1
        stamp[v0] = tag
        prev_e = first
        v = ends[first, 0] if ends[first, 1] == v0 else ends[first, 1]
        while v != v0:
            stamp[v] = tag
            nxt = -1
            for j in range(indptr[v], indptr[v + 1]):
                e = inc[j]
                if state[e] and e != prev_e:
                    nxt = e
                    break
            prev_e = nxt
            v = ends[nxt, 0] if ends[nxt, 1] == v else ends[nxt, 1]
    return count


@nb.njit(cache=True)
def _run_chain(state, degree, face_edges, face_len, face_verts, face_nverts,
               ends, indptr, inc, logx, logn, x_zero, n_zero, choices, logu,
               stamp, counters, loop_count, edge_count, bound_check, code, trace):
    """Metropolis face flips.  ``counters``: [accepted, invalid, bound_violations,
    proposals_checked].  If ``trace`` has rows, row ``t`` records
    ``(|omega|, l(omega), bitmask)`` after proposal ``t``.  Returns the updated
    (loop_count, edge_count, bitmask)."""
    tag = stamp.max() + 1
    record = trace.shape[0] > 0
    for t in range(len(choices)):
        f = choices[t]
        k = face_len[f]
        nv = face_nverts[f]
        # degree after the flip at the face's vertices
        valid = True
        for a in range(nv):
            v = face_verts[f, a]
            d = degree[v]
            for b in range(k):
                e = face_edges[f, b]
                if ends[e, 0] == v or ends[e, 1] == v:
                    d += -1 if state[e] else 1
            if d != 0 and d != 2:
                valid = False
                break
        if not valid:
            counters[1] += 1
            if record:
                trace[t, 0] = edge_count
                trace[t, 1] = loop_count
                trace[t, 2] = code
            continue
        d_edges = 0
        for b in range(k):
            d_edges += -1 if state[face_edges[f, b]] else 1
        before = _loops_through(state, face_verts[f], nv, ends, indptr, inc, stamp, tag)
        tag += 1
        for b in range(k):
            state[face_edges[f, b]] = not state[face_edges[f, b]]
        after = _loops_through(state, face_verts[f], nv, ends, indptr, inc, stamp, tag)
        tag += 1
        d_loops = after - before
        lr = 0.0
        if d_edges != 0:
            lr += -np.inf if (x_zero and d_edges > 0) else (np.inf if x_zero else d_edges * logx)
        if d_loops != 0:
            lr += -np.inf if (n_zero and d_loops > 0) else (np.inf if n_zero else d_loops * logn)
        if bound_check:
            span = k * (abs(logx) + abs(logn))
            counters[3] += 1
            if lr < -span - 1e-9 or lr > span + 1e-9:
                counters[2] += 1
        if lr >= 0.0 or logu[t] < lr:
            counters[0] += 1
            loop_count += d_loops
            edge_count += d_edges
            for a in range(nv):
                v = face_verts[f, a]
                for b in range(k):
                    e = face_edges[f, b]
                    if ends[e, 0] == v or ends[e, 1] == v:
                        degree[v] += 1 if state[e] else -1
            for b in range(k):
                code ^= np.int64(1) << np.int64(face_edges[f, b] & 63)
        else:
            for b in range(k):
                state[face_edges[f, b]] = not state[face_edges[f, b]]
        if record:
            trace[t, 0] = edge_count
            trace[t, 1] = loop_count
            trace[t, 2] = code
    return loop_count, edge_count, code


class LoopSampler:
    """Face-flip Metropolis chain on a patch.

    Proposals pick a uniform face (hexagons on a hex patch, unit squares on
    Z^2).  With free boundary and all edges active the weights are
    ``x^|omega| n^l(omega)``.  Irreducibility is only guaranteed where it has
    been checked against :func:`enumerate_exact`.
    """

    def __init__(self, g: LatticeGraph, params: GibbsParams, streams: Streams,
                 init=None, faces=None):
        if params.active is not None:
            raise NotImplementedError("the compiled sampler runs on fully active patches")
        self.g = g
        self.params = params
        self.streams = streams
        faces = g.faces() if faces is None else faces
        if not faces:
            raise ValueError("graph has no faces to flip")
        self.faces = faces
        F = len(faces)
        kmax = max(len(f) for f in faces)
        self.face_edges = np.full((F, kmax), -1, dtype=np.int64)
        self.face_len = np.array([len(f) for f in faces], dtype=np.int64)
        verts = [sorted({int(v) for e in f for v in g.edges[e]}) for f in faces]
        vmax = max(len(v) for v in verts)
        self.face_verts = np.full((F, vmax), -1, dtype=np.int64)
        self.face_nverts = np.array([len(v) for v in verts], dtype=np.int64)
        for i, (f, vs) in enumerate(zip(faces, verts)):
            self.face_edges[i, :len(f)] = f
            self.face_verts[i, :len(vs)] = vs
        cfg = init if isinstance(init, LoopConfig) else LoopConfig(g, () if init is None else init)
        self.state = cfg.mask.copy()
        self.degree = cfg.degree.copy()
        self.loop_count = cfg.loop_count
        self.edge_count = cfg.edge_count
        self.stamp = np.zeros(g.vertex_count, dtype=np.int64)
        self.counters = np.zeros(4, dtype=np.int64)
        self._chunk = 0
        x, n = params.x, params.n
        self._logx = math.log(x) if x > 0 else 0.0
        self._logn = math.log(n) if n > 0 else 0.0

    def _code(self) -> int:
        c = 0
        for e in np.flatnonzero(self.state).tolist():
            c ^= 1 << (e & 63)
        return c - (1 << 64) if c >= 1 << 63 else c

    def run(self, proposals: int, bound_check: bool = True, trace: bool = False):
        """Run ``proposals`` face-flip proposals.

        With ``trace`` returns an ``(proposals, 3)`` array of
        ``(|omega|, l(omega), edge bitmask)`` after every proposal; the
        bitmask is only meaningful on graphs with at most 63 edges.
        """
        rng = self.streams("loopon", "chain", self._chunk)
        self._chunk += 1
        choices = rng.integers(0, len(self.faces), size=proposals)
        logu = np.log(rng.random(proposals))
        rows = np.zeros((proposals if trace else 0, 3), dtype=np.int64)
        self.loop_count, self.edge_count, _ = _run_chain(
            self.state, self.degree, self.face_edges, self.face_len, self.face_verts,
            self.face_nverts, self.g.edges, self.g.indptr, self.g.incident_edges,
            self._logx, self._logn, self.params.x == 0, self.params.n == 0,
            choices, logu, self.stamp, self.counters, self.loop_count, self.edge_count,
            bound_check, np.int64(self._code()), rows)
        return rows if trace else self

    def sample_frequencies(self, proposals: int) -> dict:
        """Empirical frequency of each configuration over ``proposals``
        consecutive states, keyed by sorted edge-id tuples."""
        if self.g.edge_count > 63:
            raise ValueError("configuration frequencies need at most 63 edges")
        rows = self.run(proposals, trace=True)
        codes, counts = np.unique(rows[:, 2], return_counts=True)
        out = {}
        for c, k in zip(codes.tolist(), counts.tolist()):
            c &= (1 << 64) - 1
            key = tuple(e for e in range(self.g.edge_count) if c >> e & 1)
            out[key] = k / proposals
        return out

    @property
    def config(self) -> LoopConfig:
        return LoopConfig(self.g, self.state.copy())

    @property
    def accepted(self) -> int:
        return int(self.counters[0])

    @property
    def invalid(self) -> int:
        return int(self.counters[1])

    @property
    def bound_violations(self) -> int:
        return int(self.counters[2])

    @property
    def bound_checks(self) -> int:
        return int(self.counters[3])

    def longest_loop(self) -> int:
        nb_ = self.g.neighbor_lists
        seen = np.zeros(self.g.vertex_count, dtype=bool)
        best = 0
        deg = self.degree
        for v in np.flatnonzero(deg == 2).tolist():
            if seen[v]:
                continue
            size = 0
            stack = [v]
            seen[v] = True
            while stack:
                u = stack.pop()
                size += 1
                for w, e in zip(nb_[u], self.g.incident(u).tolist()):
                    if self.state[e] and not seen[w]:
                        seen[w] = True
                        stack.append(w)
            best = max(best, size)
        return best


# -- trifurcations ------------------------------------------------------------

def count_trifurcations(g: LatticeGraph, edges) -> int:
    """Vertices whose removal splits their open cluster into exactly three parts."""
    mask = _as_mask(g, edges)
    adj = [[] for _ in range(g.vertex_count)]
    for u, v in g.edges[mask].tolist():
        adj[u].append(v)
        adj[v].append(u)
    total = 0
    for v in range(g.vertex_count):
        if len(adj[v]) < 3:
            continue
        # components of the cluster minus v, seeded from v's neighbours
        label = {}
        parts = 0
        for s in adj[v]:
            if s in label:
                continue
            parts += 1
            label[s] = parts
            stack = [s]
            while stack:
                a = stack.pop()
                for b in adj[a]:
                    if b != v and b not in label:
                        label[b] = parts
                        stack.append(b)
        total += parts == 3
    return total
