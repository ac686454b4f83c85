"""Model-agnostic analytics on finite configurations.

Connected components (union-find), the simple delayed random walk, rooted
ball classes, stationarity tests along traces, Cesaro densities, a
boundary-contact proxy for the number of ends, and the mass transport
identity on tori.
"""
from __future__ import annotations

import math
from collections import Counter, deque
from dataclasses import dataclass, field
from enum import Enum

import numba as nb
import numpy as np
from scipy import stats

from .lattice import Kind, LatticeGraph

__all__ = [
    "ClusterPartition",
    "components",
    "components_bfs",
    "sdrw_step",
    "sdrw_trace",
    "orbit_trace",
    "ball_offsets",
    "bond_ball_class",
    "permutation_ball_class",
    "StationarityReport",
    "compare_class_samples",
    "stationarity_check",
    "DensityEstimate",
    "density_along",
    "Ends",
    "ends_classification",
    "WraparoundAliasing",
    "MassFunction",
    "PHI_IDENTITY",
    "PHI_ADJACENCY",
    "PHI_PERMUTATION",
    "mass_transport_check",
]

LEFT, RIGHT, BOTTOM, TOP = 1, 2, 4, 8


# -- components ---------------------------------------------------------------

@nb.njit(cache=True)
def _find(parent, a):
    r = a
    while parent[r] != r:
        r = parent[r]
    while parent[a] != r:
        nxt = parent[a]
        parent[a] = r
        a = nxt
    return r


@nb.njit(cache=True)
def _union_all(parent, rank, size, contact, ends, mask):
    for e in range(ends.shape[0]):
        if not mask[e]:
            continue
        a = _find(parent, ends[e, 0])
        b = _find(parent, ends[e, 1])
        if a == b:
            continue
        if rank[a] < rank[b]:
            a, b = b, a
        parent[b] = a
        size[a] += size[b]
        contact[a] |= contact[b]
        if rank[a] == rank[b]:
            rank[a] += 1


def _side_flags(g: LatticeGraph) -> np.ndarray:
    flags = np.zeros(g.vertex_count, dtype=np.int64)
    if g.kind not in (Kind.Z2_WINDOW, Kind.HEX_PATCH):
        return flags
    w, h = g.dims
    v = np.arange(g.vertex_count)
    x, y = v % w, v // w
    flags[x == 0] |= LEFT
    flags[x == w - 1] |= RIGHT
    flags[y == 0] |= BOTTOM
    flags[y == h - 1] |= TOP
    return flags


@dataclass
class ClusterPartition:
    """Union-find over vertex ids with per-root size and window-side contacts
    (bit flags ``LEFT | RIGHT | BOTTOM | TOP``)."""

    parent: np.ndarray
    rank: np.ndarray
    size: np.ndarray
    contact: np.ndarray

    def find(self, v: int) -> int:
        return int(_find(self.parent, v))

    def roots(self) -> np.ndarray:
        v = np.arange(len(self.parent))
        return v[self.parent == v]

    def labels(self) -> np.ndarray:
        """Dense component labels ``0..k-1`` ordered by smallest member."""
        r = np.array([_find(self.parent, v) for v in range(len(self.parent))])
        _, first, inv = np.unique(r, return_index=True, return_inverse=True)
        order = np.argsort(np.argsort(first))
        return order[inv]

    @property
    def count(self) -> int:
        return len(self.roots())

    def component_size(self, v: int) -> int:
        return int(self.size[self.find(v)])

    def sizes(self) -> np.ndarray:
        return self.size[self.roots()]

    def contacts(self, v: int) -> int:
        return int(self.contact[self.find(v)])


def components(g: LatticeGraph, open_edges: np.ndarray) -> ClusterPartition:
    """Connected components of the subgraph of open edges (all vertices kept)."""
    mask = np.asarray(open_edges, dtype=bool)
    if mask.shape != (g.edge_count,):
        raise ValueError("open_edges must be a boolean mask over the edges")
    n = g.vertex_count
    parent = np.arange(n, dtype=np.int64)
    rank = np.zeros(n, dtype=np.int64)
    size = np.ones(n, dtype=np.int64)
    contact = _side_flags(g)
    _union_all(parent, rank, size, contact, g.edges, mask)
    return ClusterPartition(parent, rank, size, contact)


def components_bfs(g: LatticeGraph, open_edges: np.ndarray) -> np.ndarray:
    """Breadth-first labelling, used as an independent oracle."""
    nbrs = g.neighbor_lists
    label = np.full(g.vertex_count, -1, dtype=np.int64)
    k = 0
    for s in range(g.vertex_count):
        if label[s] >= 0:
            continue
        label[s] = k
        q = deque([s])
        while q:
            u = q.popleft()
            for w, e in zip(nbrs[u], g.incident(u).tolist()):
                if open_edges[e] and label[w] < 0:
                    label[w] = k
                    q.append(w)
        k += 1
    return label


# -- walks and traces ----------------------------------------------------------

def sdrw_step(g: LatticeGraph, omega: np.ndarray, v: int, gen: np.random.Generator) -> int:
    """Pick a uniform ambient neighbour; move there iff the edge is open."""
    ip = g.indptr
    d = ip[v + 1] - ip[v]
    if d == 0:
        return v
    j = ip[v] + gen.integers(d)
    return int(g.adjacency[j]) if omega[g.incident_edges[j]] else v


@nb.njit(cache=True)
def _sdrw(indptr, adjacency, incident, omega, v0, u):
    out = np.empty(len(u) + 1, dtype=np.int64)
    out[0] = v0
    v = v0
    for t in range(len(u)):
        d = indptr[v + 1] - indptr[v]
        if d > 0:
            j = indptr[v] + int(u[t] * d)
            if omega[incident[j]]:
                v = adjacency[j]
        out[t + 1] = v
    return out


def sdrw_trace(g: LatticeGraph, omega: np.ndarray, v0: int, steps: int,
               gen: np.random.Generator) -> np.ndarray:
    """Vertices ``v_0, ..., v_steps`` of the delayed walk started at ``v0``."""
    return _sdrw(g.indptr, g.adjacency, g.incident_edges,
                 np.asarray(omega, dtype=bool), int(v0), gen.random(steps))


def orbit_trace(forward: np.ndarray, v0: int, steps: int) -> np.ndarray:
    """``v0, pi(v0), ..., pi^steps(v0)``."""
    out = np.empty(steps + 1, dtype=np.int64)
    v = int(v0)
    for i in range(steps + 1):
        out[i] = v
        v = int(forward[v])
    return out


# -- rooted ball classes ---------------------------------------------------

def ball_offsets(r: int) -> list:
    """Offsets within L1 distance ``r`` in a fixed (dy, dx) order."""
    return [(dx, dy) for dy in range(-r, r + 1) for dx in range(-r, r + 1)
            if abs(dx) + abs(dy) <= r]


def _ball_edges(r: int) -> list:
    offs = set(ball_offsets(r))
    out = []
    for dx, dy in ball_offsets(r):
        for ex, ey in ((1, 0), (0, 1)):
            if (dx + ex, dy + ey) in offs:
                out.append(((dx, dy), (dx + ex, dy + ey)))
    return out


def _torus_id(g, x, y):
    w, h = g.dims
    return (y % h) * w + (x % w)


def bond_ball_class(g: LatticeGraph, omega: np.ndarray, v: int, r: int = 1) -> int:
    """Integer code of the edge states inside the radius-``r`` ball at ``v``.

    The normal form lists the ball's edges in a fixed coordinate order
    relative to the root, so two rooted balls get the same code iff they
    agree up to translation.
    """
    if g.kind is not Kind.Z2_TORUS:
        raise ValueError("ball classes are defined on tori")
    x, y = g.coord(int(v))
    code = 0
    for i, ((ax, ay), (bx, by)) in enumerate(_ball_edges(r)):
        e = g.edge_id(_torus_id(g, x + ax, y + ay), _torus_id(g, x + bx, y + by))
        code |= int(bool(omega[e])) << i
    return code


def _torus_disp(g, a, b):
    w, h = g.dims
    (ax, ay), (bx, by) = g.coord(int(a)), g.coord(int(b))
    dx = (bx - ax + w // 2) % w - w // 2
    dy = (by - ay + h // 2) % h - h // 2
    return dx, dy


def permutation_ball_class(g: LatticeGraph, forward: np.ndarray, v: int, r: int = 1) -> tuple:
    """For each vertex ``u`` of the radius-``r`` ball at ``v`` (fixed order):
    0 if ``pi(u) = u``, 1 if ``pi(u)`` is a lattice neighbour of ``u``,
    2 otherwise."""
    if g.kind is not Kind.Z2_TORUS:
        raise ValueError("ball classes are defined on tori")
    x, y = g.coord(int(v))
    out = []
    for dx, dy in ball_offsets(r):
        u = _torus_id(g, x + dx, y + dy)
        ddx, ddy = _torus_disp(g, u, forward[u])
        d = abs(ddx) + abs(ddy)
        out.append(min(d, 2))
    return tuple(out)


# -- stationarity -------------------------------------------------------------

@dataclass
class StationarityReport:
    steps: int
    samples: int
    bins: int
    chi2: float
    pvalue: float
    min_bin_pvalue: float
    alpha: float
    rejected: bool
    counts: dict = field(repr=False, default_factory=dict)


def compare_class_samples(first, last, alpha: float = 0.01, steps: int = 0) -> StationarityReport:
    """Homogeneity of two categorical samples.

    The decision uses one 2x2 test per class at level ``alpha / #classes``
    (Bonferroni; Fisher's exact test, since rare classes have small counts).
    The omnibus contingency chi-square is reported alongside.
    """
    c0, c1 = Counter(first), Counter(last)
    keys = sorted(set(c0) | set(c1), key=repr)
    n0, n1 = len(first), len(last)
    table = np.array([[c0[k] for k in keys], [c1[k] for k in keys]], dtype=float)
    K = len(keys)
    if K < 2 or np.array_equal(table[0], table[1]):
        chi2, pval = 0.0, 1.0
    else:
        chi2, pval, _, _ = stats.chi2_contingency(table, correction=False)
    pmin = 1.0
    for j in range(K):
        a, b = table[0, j], table[1, j]
        if a == b:
            continue
        pj = stats.fisher_exact([[a, n0 - a], [b, n1 - b]])[1]
        pmin = min(pmin, pj)
    return StationarityReport(
        steps=steps, samples=n0, bins=K, chi2=float(chi2), pvalue=float(pval),
        min_bin_pvalue=float(pmin), alpha=alpha,
        rejected=bool(K > 0 and pmin < alpha / max(K, 1)),
        counts={"first": dict(c0), "last": dict(c1)},
    )


def stationarity_check(sample_pair, samples: int, steps: int, alpha: float = 0.01) -> StationarityReport:
    """Run ``sample_pair(i, steps) -> (class_at_v0, class_at_vm)`` for
    ``i < samples`` and compare the two marginals."""
    first, last = [], []
    for i in range(samples):
        a, b = sample_pair(i, steps)
        first.append(a)
        last.append(b)
    return compare_class_samples(first, last, alpha=alpha, steps=steps)


# -- densities ---------------------------------------------------------------

@dataclass
class DensityEstimate:
    prefix: np.ndarray       # running averages after 1, 2, ... observations
    indicators: np.ndarray

    @property
    def value(self) -> float:
        return float(self.prefix[-1]) if len(self.prefix) else math.nan

    def at(self, n: int) -> float:
        """Average of the first ``n`` indicators."""
        return float(self.prefix[n - 1])


def density_along(observations) -> DensityEstimate:
    """Cesaro averages of a 0/1 observation sequence along a trace."""
    ind = np.asarray(observations, dtype=np.int64)
    if ind.size and not np.all((ind == 0) | (ind == 1)):
        raise ValueError("observations must be indicators")
    # exact rationals: cumulative integer count over integer length
    prefix = np.cumsum(ind) / np.arange(1, len(ind) + 1)
    return DensityEstimate(prefix, ind)


# -- ends proxy -----------------------------------------------------------------

class Ends(str, Enum):
    FINITE = "finite"
    ONE = "spanning-1-direction"
    TWO = "spanning-2-directions"


def ends_classification(partition: ClusterPartition, v: int, g: LatticeGraph) -> Ends:
    """Boundary-contact proxy for the number of ends of ``v``'s component.

    No window side touched -> finite; exactly one side -> one direction;
    two or more sides -> two directions.
    """
    if g.kind not in (Kind.Z2_WINDOW, Kind.HEX_PATCH):
        raise ValueError("the ends proxy needs a free-boundary window")
    sides = bin(partition.contacts(v)).count("1")
    if sides == 0:
        return Ends.FINITE
    return Ends.ONE if sides == 1 else Ends.TWO


# -- mass transport ------------------------------------------------------------

class WraparoundAliasing(ValueError):
    """The mass function's range reaches half the torus."""


@dataclass(frozen=True)
class MassFunction:
    """``phi(config, xs, ys) -> masses`` (vectorised over id arrays) with a
    range bound ``range_of(config)`` in the L-infinity torus metric."""

    name: str
    phi: object
    range_of: object


def _phi_identity(cfg, xs, ys):
    return (xs == ys).astype(float)


def _phi_adjacency(cfg, xs, ys):
    g, omega = cfg["graph"], cfg["omega"]
    w, h = g.dims
    right = np.empty(g.vertex_count, dtype=np.int64)
    up = np.empty(g.vertex_count, dtype=np.int64)
    hor = g.orientation == 0
    right[g.edges[hor, 0]] = np.flatnonzero(hor)
    up[g.edges[~hor, 0]] = np.flatnonzero(~hor)
    dx = (ys % w - xs % w + w // 2) % w - w // 2
    dy = (ys // w - xs // w + h // 2) % h - h // 2
    out = np.zeros(len(xs))
    for (ex, ey), base, table in (((1, 0), xs, right), ((-1, 0), ys, right),
                                  ((0, 1), xs, up), ((0, -1), ys, up)):
        sel = (dx == ex) & (dy == ey)
        out[sel] = omega[table[base[sel]]]
    return out


def _phi_permutation(cfg, xs, ys):
    return (cfg["forward"][xs] == ys).astype(float)


def _perm_range(cfg):
    g, fwd = cfg["graph"], cfg["forward"]
    w, h = g.dims
    v = np.arange(g.vertex_count)
    dx = np.abs((fwd % w - v % w + w // 2) % w - w // 2)
    dy = np.abs((fwd // w - v // w + h // 2) % h - h // 2)
    return int(max(dx.max(initial=0), dy.max(initial=0)))


PHI_IDENTITY = MassFunction("identity", _phi_identity, lambda cfg: 0)
PHI_ADJACENCY = MassFunction("adjacency", _phi_adjacency, lambda cfg: 1)
PHI_PERMUTATION = MassFunction("permutation", _phi_permutation, _perm_range)


def mass_transport_check(g: LatticeGraph, mass: MassFunction, cfg: dict,
                         tol: float = 1e-9) -> dict:
    """Mass received vs mass sent, each averaged over all roots of the torus.

    ``received = (1/N) sum_o sum_x phi(x, o)`` and
    ``sent = (1/N) sum_o sum_y phi(o, y)``, with ``x, y`` ranging over the
    L-infinity box of the mass function's range around ``o``.
    """
    if g.kind is not Kind.Z2_TORUS:
        raise ValueError("mass transport is checked on tori")
    R = int(mass.range_of(cfg))
    w, h = g.dims
    if 2 * R >= min(w, h):
        raise WraparoundAliasing(
            f"{mass.name}: range {R} reaches half the {w}x{h} torus")
    N = g.vertex_count
    o = np.arange(N)
    ox, oy = o % w, o // w
    received = []
    sent = []
    for dy in range(-R, R + 1):
        for dx in range(-R, R + 1):
            other = ((oy + dy) % h) * w + (ox + dx) % w
            received.append(mass.phi(cfg, other, o))
            sent.append(mass.phi(cfg, o, other))
    rec = math.fsum(np.concatenate(received).tolist()) / N
    snt = math.fsum(np.concatenate(sent).tolist()) / N
    return {"phi": mass.name, "range": R, "received": rec, "sent": snt,
            "difference": abs(rec - snt), "ok": abs(rec - snt) <= tol}
