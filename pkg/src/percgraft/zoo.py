"""Poisson zoo site percolation on Z^2 windows and tori.

Each vertex ``v`` receives ``psi_v ~ Poisson(lambda)`` animals, each an
independent draw from an animal law translated to ``v``; a site is occupied
if some animal covers it.

Coupling across intensities: every vertex carries unit-rate arrival times
``T_1 < T_2 < ...`` on the intensity axis and ``psi_v(lambda) = #{k : T_k <=
lambda}``.  The animal attached to arrival ``(v, k)`` does not depend on
``lambda``, so a larger intensity only ever adds animals.  This is the
Poisson superposition ``Poisson(l2) = Poisson(l1) + Poisson(l2 - l1)``
realised on shared streams.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .lattice import Kind, LatticeGraph
from .randomness import Streams, block_draw

__all__ = [
    "Singleton",
    "FixedShape",
    "RandomWalkWorm",
    "Box",
    "parse_animal",
    "ZooConfig",
    "generate_zoo",
    "bernoulli_site",
    "site_clusters",
    "reduce_to_bernoulli_check",
    "insert_animal_surgery",
    "big_cluster_counts",
    "interior_mask",
]


def _connected(offsets) -> bool:
    cells = {tuple(o) for o in offsets}
    start = next(iter(cells))
    seen = {start}
    q = deque([start])
    while q:
        x, y = q.popleft()
        for c in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if c in cells and c not in seen:
                seen.add(c)
                q.append(c)
    return len(seen) == len(cells)


def _check_support(offsets) -> np.ndarray:
    arr = np.unique(np.asarray(offsets, dtype=np.int64).reshape(-1, 2), axis=0)
    if not any((a == 0 and b == 0) for a, b in arr.tolist()):
        raise ValueError("animal support must contain the origin")
    if not _connected(arr.tolist()):
        raise ValueError("animal support must be connected")
    return arr


class AnimalDistribution:
    """Law of a finite connected vertex set containing the origin."""

    deterministic = False
    tail_mass = 0.0

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    @property
    def max_extent(self) -> int:
        """Bound on ``max(|dx|, |dy|)`` over the support."""
        raise NotImplementedError

    def mean_size(self) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class Singleton(AnimalDistribution):
    deterministic = True

    def sample(self, rng=None):
        return np.zeros((1, 2), dtype=np.int64)

    @property
    def max_extent(self):
        return 0

    def mean_size(self):
        return 1.0

    def __str__(self):
        return "singleton"


@dataclass(frozen=True, eq=False)
class FixedShape(AnimalDistribution):
    offsets: np.ndarray
    deterministic = True

    def __post_init__(self):
        object.__setattr__(self, "offsets", _check_support(self.offsets))

    def sample(self, rng=None):
        return self.offsets

    @property
    def max_extent(self):
        return int(np.abs(self.offsets).max())

    def mean_size(self):
        return float(len(self.offsets))

    def __str__(self):
        return "shape:" + ";".join(f"{a},{b}" for a, b in self.offsets.tolist())


@dataclass(frozen=True)
class RandomWalkWorm(AnimalDistribution):
    """Trace of a simple random walk with ``L - 1`` steps.

    ``L`` is geometric on ``{1, 2, ...}`` with success probability ``p``,
    capped at ``cap``; ``tail_mass = P(L > cap)`` is the mass moved onto
    the cap.
    """

    p: float
    cap: int = 200

    def __post_init__(self):
        if not 0 < self.p <= 1:
            raise ValueError("worm length parameter must lie in (0, 1]")
        if self.cap < 1:
            raise ValueError("worm cap must be at least 1")

    @property
    def tail_mass(self):
        return (1 - self.p) ** self.cap

    def sample(self, rng):
        L = min(int(rng.geometric(self.p)), self.cap)
        steps = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]], dtype=np.int64)
        walk = np.zeros((L, 2), dtype=np.int64)
        if L > 1:
            walk[1:] = np.cumsum(steps[rng.integers(0, 4, size=L - 1)], axis=0)
        return np.unique(walk, axis=0)

    @property
    def max_extent(self):
        return self.cap - 1

    def mean_size(self):
        # upper bound on the mean trace size: E[min(L, cap)]
        q = 1 - self.p
        return (1 - q ** self.cap) / self.p

    def __str__(self):
        return f"worm:geom:{self.p}:{self.cap}"


@dataclass(frozen=True)
class Box(AnimalDistribution):
    """Axis-aligned ``a x b`` box with corner at the origin, sides uniform
    on ``{lo, ..., hi}`` independently."""

    lo: int = 1
    hi: int = 1

    def __post_init__(self):
        if not 1 <= self.lo <= self.hi:
            raise ValueError("box sides need 1 <= lo <= hi")

    def sample(self, rng):
        a, b = rng.integers(self.lo, self.hi + 1, size=2)
        xs, ys = np.meshgrid(np.arange(a), np.arange(b), indexing="ij")
        return np.stack([xs.ravel(), ys.ravel()], axis=1).astype(np.int64)

    @property
    def max_extent(self):
        return self.hi - 1

    def mean_size(self):
        m = (self.lo + self.hi) / 2
        return m * m

    def __str__(self):
        return f"box:{self.lo}:{self.hi}"


def parse_animal(text: str) -> AnimalDistribution:
    """Parse ``singleton``, ``shape:0,0;1,0``, ``worm:geom:P[:CAP]`` or
    ``box:LO[:HI]``."""
    parts = text.strip().split(":")
    head = parts[0].lower()
    try:
        if head == "singleton" and len(parts) == 1:
            return Singleton()
        if head == "shape" and len(parts) == 2:
            pts = [tuple(int(c) for c in s.split(",")) for s in parts[1].split(";") if s]
            return FixedShape(np.array(pts))
        if head == "worm" and len(parts) in (3, 4) and parts[1] == "geom":
            cap = int(parts[3]) if len(parts) == 4 else 200
            return RandomWalkWorm(float(parts[2]), cap)
        if head == "box" and len(parts) in (2, 3):
            lo = int(parts[1])
            return Box(lo, int(parts[2]) if len(parts) == 3 else lo)
    except (ValueError, IndexError) as err:
        raise ValueError(f"bad animal spec {text!r}: {err}") from None
    raise ValueError(f"unknown animal spec {text!r}")


@dataclass
class ZooConfig:
    lam: float
    occupancy: np.ndarray               # (V,) bool
    counts: np.ndarray                  # psi_v, (V,) int
    clipped: int = 0                    # placements that overhung the window
    log: list = field(default_factory=list)  # (anchor, arrival index, clipped)

    def occupied_fraction(self, mask=None) -> float:
        occ = self.occupancy if mask is None else self.occupancy[mask]
        return float(occ.mean()) if occ.size else 0.0


def _require_grid(g: LatticeGraph):
    if g.kind not in (Kind.Z2_WINDOW, Kind.Z2_TORUS):
        raise ValueError("the Poisson zoo is implemented on z2_window and z2_torus")


def _place(g, occ, anchors, offsets):
    """OR the translated support into ``occ``; return the number of anchors
    whose animal was clipped."""
    w, h = g.dims
    ax, ay = anchors % w, anchors // w
    torus = g.kind is Kind.Z2_TORUS
    clipped = np.zeros(len(anchors), dtype=bool)
    for dx, dy in offsets.tolist():
        x, y = ax + dx, ay + dy
        if torus:
            x, y = x % w, y % h
            occ[y * w + x] = True
        else:
            inside = (x >= 0) & (x < w) & (y >= 0) & (y < h)
            clipped |= ~inside
            occ[y[inside] * w + x[inside]] = True
    return clipped


def generate_zoo(g: LatticeGraph, lam: float, dist: AnimalDistribution, streams: Streams,
                 audit: bool = False) -> ZooConfig:
    """Sample the zoo at intensity ``lam`` on the coupled streams.

    Arrival round ``k`` (the ``k``-th animal at each vertex) draws its gaps
    from block stream ``("zoo", "gap", k)``; a random animal at ``(v, k)``
    comes from ``("zoo", "animal", k, v)``.
    """
    _require_grid(g)
    if not (lam >= 0 and math.isfinite(lam)):
        raise ValueError("lambda must be finite and non-negative")
    N = g.vertex_count
    occ = np.zeros(N, dtype=bool)
    counts = np.zeros(N, dtype=np.int64)
    T = np.zeros(N)
    clipped_total = 0
    log = []
    exp_draw = lambda gen, size: gen.standard_exponential(size)
    k = 0
    while True:
        T += block_draw(streams, ("zoo", "gap", k), 0, N, exp_draw)
        anchors = np.flatnonzero(T <= lam)
        if len(anchors) == 0:
            break
        counts[anchors] += 1
        if dist.deterministic:
            clipped = _place(g, occ, anchors, dist.sample())
        else:
            clipped = np.zeros(len(anchors), dtype=bool)
            for i, v in enumerate(anchors.tolist()):
                shape = dist.sample(streams("zoo", "animal", k, v))
                clipped[i] = _place(g, occ, np.array([v]), shape)[0]
        clipped_total += int(clipped.sum())
        if audit:
            log.extend(zip(anchors.tolist(), [k] * len(anchors), clipped.tolist()))
        k += 1
    return ZooConfig(float(lam), occ, counts, clipped_total, log)


def interior_mask(g: LatticeGraph, margin: int) -> np.ndarray:
    """Vertices at distance more than ``margin`` from the window boundary."""
    w, h = g.dims
    if g.kind is Kind.Z2_TORUS:
        return np.ones(g.vertex_count, dtype=bool)
    x = np.arange(g.vertex_count) % w
    y = np.arange(g.vertex_count) // w
    return (x > margin) & (x < w - 1 - margin) & (y > margin) & (y < h - 1 - margin)


def bernoulli_site(g: LatticeGraph, p: float, gen: np.random.Generator) -> np.ndarray:
    return gen.random(g.vertex_count) < p


def site_clusters(g: LatticeGraph, occ: np.ndarray):
    """Connected components of the occupied sites: ``(k, labels)`` with
    label ``-1`` on vacant sites."""
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components

    u, v = g.edges[:, 0], g.edges[:, 1]
    keep = occ[u] & occ[v]
    N = g.vertex_count
    A = coo_matrix((np.ones(keep.sum()), (u[keep], v[keep])), shape=(N, N))
    _, lab = connected_components(A, directed=False)
    lab = np.where(occ, lab, -1)
    uniq, lab2 = np.unique(lab[occ], return_inverse=True)
    out = np.full(N, -1, dtype=np.int64)
    out[occ] = lab2
    return len(uniq), out


def _size_histogram(sizes, edges):
    return np.histogram(sizes, bins=edges)[0]


def reduce_to_bernoulli_check(g: LatticeGraph, lam: float, samples: int, streams: Streams,
                              alpha: float = 0.01) -> dict:
    """Compare the singleton zoo with Bernoulli site percolation at
    ``p = 1 - exp(-lam)``: occupancy (3 sigma), nearest-neighbour
    correlation (3 sigma) and a chi-square homogeneity test on cluster
    sizes."""
    _require_grid(g)
    p = 1.0 - math.exp(-lam)
    occ_z, occ_b, corr = [], [], []
    sizes_z, sizes_b = [], []
    u, v = g.edges[:, 0], g.edges[:, 1]
    for s in range(samples):
        z = generate_zoo(g, lam, Singleton(), streams.sub("zoo", s)).occupancy
        b = bernoulli_site(g, p, streams("bernoulli", s))
        occ_z.append(z.mean())
        occ_b.append(b.mean())
        a, c = z[u].astype(float), z[v].astype(float)
        corr.append(np.mean(a * c) - np.mean(a) * np.mean(c))
        for occ, bucket in ((z, sizes_z), (b, sizes_b)):
            k, lab = site_clusters(g, occ)
            if k:
                bucket.extend(np.bincount(lab[lab >= 0]).tolist())
    N = g.vertex_count
    sigma = math.sqrt(p * (1 - p) / (N * samples))
    occ_mean = float(np.mean(occ_z))
    corr_mean = float(np.mean(corr))
    corr_se = float(np.std(corr, ddof=1) / math.sqrt(samples)) if samples > 1 else math.inf
    # cluster-size bins: 1, 2, 3-4, 5-8, ... merged until expected counts >= 5
    top = max(max(sizes_z, default=1), max(sizes_b, default=1))
    edges = [1, 2, 3]
    while edges[-1] <= top:
        edges.append(edges[-1] * 2 - 1)
    hz = _size_histogram(sizes_z, edges)
    hb = _size_histogram(sizes_b, edges)
    table = np.array([hz, hb])
    table = _merge_sparse_bins(table)
    if table.shape[1] >= 2:
        chi2, pval, dof, _ = stats.chi2_contingency(table)
    else:
        chi2, pval, dof = 0.0, 1.0, 0
    return {
        "p": p,
        "occupancy": occ_mean,
        "occupancy_sigma": sigma,
        "occupancy_ok": abs(occ_mean - p) <= 3 * sigma,
        "bernoulli_occupancy": float(np.mean(occ_b)),
        "nn_covariance": corr_mean,
        "nn_covariance_se": corr_se,
        "uncorrelated_ok": abs(corr_mean) <= 3 * corr_se,
        "cluster_chi2": float(chi2),
        "cluster_dof": int(dof),
        "cluster_pvalue": float(pval),
        "cluster_ok": bool(pval >= alpha),
    }


def _merge_sparse_bins(table: np.ndarray, min_expected: float = 5.0) -> np.ndarray:
    """Merge adjacent columns of a 2-row contingency table until every
    expected count reaches ``min_expected``."""
    cols = [c for c in table.T if c.sum() > 0]
    merged = []
    acc = None
    total = table.sum()
    rows = table.sum(axis=1)
    for c in cols:
        acc = c.copy() if acc is None else acc + c
        if np.all(rows * acc.sum() / total >= min_expected):
            merged.append(acc)
            acc = None
    if acc is not None:
        if merged:
            merged[-1] = merged[-1] + acc
        else:
            merged.append(acc)
    return np.array(merged).T


def insert_animal_surgery(g: LatticeGraph, cfg: ZooConfig, path, dist: AnimalDistribution,
                          streams: Streams) -> ZooConfig:
    """Add one extra animal at every vertex of ``path`` (``psi_v + 1``)."""
    _require_grid(g)
    occ = cfg.occupancy.copy()
    counts = cfg.counts.copy()
    clipped = cfg.clipped
    log = list(cfg.log)
    for i, v in enumerate(path):
        v = int(v)
        shape = dist.sample(streams("zoo", "surgery", i, v))
        c = bool(_place(g, occ, np.array([v]), shape)[0])
        counts[v] += 1
        clipped += c
        log.append((v, "surgery", c))
    return ZooConfig(cfg.lam, occ, counts, clipped, log)


def big_cluster_counts(g: LatticeGraph, lam: float, dist: AnimalDistribution, samples: int,
                       streams: Streams) -> np.ndarray:
    """Number of occupied clusters whose bounding box exceeds half the
    window in some direction, per sample."""
    _require_grid(g)
    w, h = g.dims
    out = np.zeros(samples, dtype=np.int64)
    xs = np.arange(g.vertex_count) % w
    ys = np.arange(g.vertex_count) // w
    for s in range(samples):
        occ = generate_zoo(g, lam, dist, streams.sub("big", s)).occupancy
        k, lab = site_clusters(g, occ)
        if not k:
            continue
        m = lab >= 0
        l = lab[m]
        ext = []
        for coord, side in ((xs[m], w), (ys[m], h)):
            lo = np.full(k, np.iinfo(np.int64).max)
            hi = np.full(k, np.iinfo(np.int64).min)
            np.minimum.at(lo, l, coord)
            np.maximum.at(hi, l, coord)
            ext.append(hi - lo > side // 2)
        out[s] = int(np.count_nonzero(ext[0] | ext[1]))
    return out
