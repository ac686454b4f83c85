"""Finite graph substrates: Z^2 windows and tori, brick-wall hexagonal
patches, paths and truncated regular trees.

Vertices are integers.  On the grid-like kinds, vertex ``(x, y)`` has id
``y * width + x`` so coordinates and ids round-trip in O(1).
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np

__all__ = [
    "Kind",
    "Boundary",
    "LatticeGraph",
    "EscapesWindow",
    "build_lattice",
    "translate",
    "ball",
    "HORIZONTAL",
    "VERTICAL",
    "TREE",
]

HORIZONTAL, VERTICAL, TREE = 0, 1, 2

MAX_VERTICES = 2**31 - 1


class Kind(str, Enum):
    Z2_WINDOW = "z2_window"
    Z2_TORUS = "z2_torus"
    HEX_PATCH = "hex_patch"
    PATH = "path"
    TREE = "tree"


class Boundary(str, Enum):
    FREE = "free"
    PERIODIC = "periodic"


class EscapesWindow(ValueError):
    """A translation moved a vertex outside a free-boundary window."""


@dataclass(frozen=True, eq=False)
class LatticeGraph:
    kind: Kind
    dims: tuple
    boundary: Boundary
    vertex_count: int
    edges: np.ndarray = field(repr=False)        # (E, 2) int64, u < v not guaranteed
    orientation: np.ndarray = field(repr=False)  # (E,) int8

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def is_grid(self) -> bool:
        return self.kind in (Kind.Z2_WINDOW, Kind.Z2_TORUS, Kind.HEX_PATCH)

    @property
    def width(self) -> int:
        return self.dims[0]

    @property
    def height(self) -> int:
        return self.dims[1] if len(self.dims) > 1 else 1

    def coord(self, v: int) -> tuple[int, int]:
        w = self.dims[0]
        return (v % w, v // w)

    def vid(self, x: int, y: int) -> int:
        return y * self.dims[0] + x

    def parity(self, v: int) -> int:
        x, y = self.coord(v)
        return (x + y) & 1

    @cached_property
    def _csr(self):
        n = self.vertex_count
        u, v = self.edges[:, 0], self.edges[:, 1]
        src = np.concatenate([u, v])
        dst = np.concatenate([v, u])
        eid = np.concatenate([np.arange(len(u)), np.arange(len(u))])
        order = np.lexsort((dst, src))
        src, dst, eid = src[order], dst[order], eid[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        np.cumsum(indptr, out=indptr)
        return indptr, dst, eid

    @property
    def indptr(self) -> np.ndarray:
        return self._csr[0]

    @property
    def adjacency(self) -> np.ndarray:
        return self._csr[1]

    @property
    def incident_edges(self) -> np.ndarray:
        return self._csr[2]

    def neighbors(self, v: int) -> np.ndarray:
        ip = self.indptr
        return self.adjacency[ip[v]:ip[v + 1]]

    def incident(self, v: int) -> np.ndarray:
        ip = self.indptr
        return self.incident_edges[ip[v]:ip[v + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @cached_property
    def _edge_lookup(self) -> dict:
        return {
            (min(a, b), max(a, b)): i
            for i, (a, b) in enumerate(self.edges.tolist())
        }

    def edge_id(self, u: int, v: int) -> int:
        """Id of the edge ``{u, v}``; raises ``KeyError`` if absent."""
        return self._edge_lookup[(min(u, v), max(u, v))]

    @cached_property
    def neighbor_lists(self) -> list:
        """Plain-Python adjacency, for scalar hot loops."""
        ip, adj = self.indptr.tolist(), self.adjacency.tolist()
        return [adj[ip[i]:ip[i + 1]] for i in range(self.vertex_count)]

    def faces(self) -> list:
        """Elementary cycles as lists of edge ids.

        Unit squares on Z^2 kinds, hexagons (2x1 bricks) on ``HEX_PATCH``.
        """
        if not self.is_grid:
            return []
        w, h = self.width, self.height
        periodic = self.boundary is Boundary.PERIODIC
        out = []
        if self.kind is Kind.HEX_PATCH:
            for y in range(h - 1):
                for x in range(0, w - 2):
                    if (x + y) % 2:
                        continue
                    cyc = [(x, y), (x + 1, y), (x + 2, y), (x + 2, y + 1),
                           (x + 1, y + 1), (x, y + 1)]
                    out.append(self._cycle_edges(cyc))
            return out
        xs = range(w) if periodic else range(w - 1)
        ys = range(h) if periodic else range(h - 1)
        for y in ys:
            for x in xs:
                x1, y1 = (x + 1) % w, (y + 1) % h
                out.append(self._cycle_edges([(x, y), (x1, y), (x1, y1), (x, y1)]))
        return out

    def _cycle_edges(self, pts):
        ids = [self.vid(*p) for p in pts]
        return [self.edge_id(a, b) for a, b in zip(ids, ids[1:] + ids[:1])]

    def to_spec(self) -> dict:
        return {"kind": self.kind.value, "dims": list(self.dims), "boundary": self.boundary.value}


def _grid_edges(w, h, periodic, brick=False):
    xs = np.arange(w)
    ys = np.arange(h)
    X, Y = np.meshgrid(xs, ys)
    X, Y = X.ravel(), Y.ravel()
    ids = Y * w + X
    if periodic:
        hmask = np.ones_like(X, dtype=bool)
        vmask = np.ones_like(X, dtype=bool)
    else:
        hmask = X < w - 1
        vmask = Y < h - 1
    if brick:
        vmask &= (X + Y) % 2 == 0
    right = Y * w + (X + 1) % w
    up = ((Y + 1) % h) * w + X
    he = np.stack([ids[hmask], right[hmask]], axis=1)
    ve = np.stack([ids[vmask], up[vmask]], axis=1)
    edges = np.concatenate([he, ve]).astype(np.int64)
    orient = np.concatenate([
        np.full(len(he), HORIZONTAL, np.int8),
        np.full(len(ve), VERTICAL, np.int8),
    ])
    return edges, orient


def _tree_edges(d, depth):
    # root has d children, every other internal vertex d - 1
    edges = []
    frontier = [0]
    n = 1
    for level in range(depth):
        nxt = []
        for v in frontier:
            k = d if level == 0 else d - 1
            for _ in range(k):
                edges.append((v, n))
                nxt.append(n)
                n += 1
                if n > MAX_VERTICES:
                    raise ValueError("tree truncation overflows the vertex id space")
        frontier = nxt
    arr = np.array(edges, dtype=np.int64).reshape(-1, 2)
    return n, arr, np.full(len(arr), TREE, np.int8)


def build_lattice(kind, dims, boundary=Boundary.FREE) -> LatticeGraph:
    """Build one of the supported finite graphs.

    ``dims`` is ``[width, height]`` for grid kinds, ``[n]`` for a path and
    ``[degree, depth]`` for a tree truncation.

    >>> g = build_lattice("z2_torus", [4, 4], "periodic")
    >>> g.vertex_count, g.edge_count
    (16, 32)
    """
    kind = Kind(kind)
    boundary = Boundary(boundary)
    dims = tuple(int(d) for d in dims)
    if any(d <= 0 for d in dims):
        raise ValueError(f"dims must be positive, got {dims}")

    if kind is Kind.TREE:
        if boundary is Boundary.PERIODIC:
            raise ValueError("periodic boundary is not defined for a tree truncation")
        if len(dims) != 2 or dims[0] < 2:
            raise ValueError("tree dims are [degree >= 2, depth]")
        n, edges, orient = _tree_edges(*dims)
        return LatticeGraph(kind, dims, boundary, n, edges, orient)

    if kind is Kind.PATH:
        if len(dims) != 1:
            raise ValueError("path dims are [n]")
        n = dims[0]
        if boundary is Boundary.PERIODIC and n < 3:
            raise ValueError("a periodic path needs at least 3 vertices")
        u = np.arange(n - 1 + (boundary is Boundary.PERIODIC))
        edges = np.stack([u, (u + 1) % n], axis=1).astype(np.int64)
        return LatticeGraph(kind, dims, boundary, n,
                            edges, np.full(len(edges), HORIZONTAL, np.int8))

    if len(dims) != 2:
        raise ValueError(f"{kind.value} dims are [width, height]")
    w, h = dims
    if w * h > MAX_VERTICES:
        raise ValueError("dims overflow the vertex id space")
    if kind is Kind.Z2_TORUS:
        if boundary is not Boundary.PERIODIC:
            raise ValueError("z2_torus requires periodic boundary")
        if w < 3 or h < 3:
            raise ValueError("torus sides must be at least 3 to avoid multi-edges")
        edges, orient = _grid_edges(w, h, True)
    elif kind is Kind.Z2_WINDOW:
        if boundary is not Boundary.FREE:
            raise ValueError("z2_window has free boundary; use z2_torus for periodic")
        edges, orient = _grid_edges(w, h, False)
    else:
        if boundary is not Boundary.FREE:
            raise ValueError("hex_patch supports free boundary only")
        edges, orient = _grid_edges(w, h, False, brick=True)
    return LatticeGraph(kind, dims, boundary, w * h, edges, orient)


def translate(g: LatticeGraph, v, shift, clip: bool = False):
    """Translate a vertex (id or ``(x, y)`` tuple) by an integer shift.

    On a torus this wraps around.  On a window a result outside the
    window raises :class:`EscapesWindow`, unless ``clip`` is set, in which
    case ``None`` is returned.  The return type follows the input type.
    """
    if g.kind not in (Kind.Z2_TORUS, Kind.Z2_WINDOW):
        raise ValueError(f"translation is not defined on {g.kind.value}")
    as_id = not isinstance(v, tuple)
    x, y = g.coord(v) if as_id else v
    dx, dy = shift
    nx, ny = x + dx, y + dy
    w, h = g.dims
    if g.kind is Kind.Z2_TORUS:
        nx, ny = nx % w, ny % h
    elif not (0 <= nx < w and 0 <= ny < h):
        if clip:
            return None
        raise EscapesWindow(f"({x},{y}) + {tuple(shift)} leaves the {w}x{h} window")
    return g.vid(nx, ny) if as_id else (nx, ny)


def translate_ids(g: LatticeGraph, ids: np.ndarray, shift) -> np.ndarray:
    """Vectorised torus translation of vertex ids."""
    if g.kind is not Kind.Z2_TORUS:
        raise ValueError("vectorised translation is only defined on tori")
    w, h = g.dims
    ids = np.asarray(ids)
    x, y = ids % w, ids // w
    return ((y + shift[1]) % h) * w + (x + shift[0]) % w


def ball(g: LatticeGraph, v: int, r: int) -> set:
    """Vertices within graph distance ``r`` of ``v`` (breadth-first)."""
    if r < 0:
        raise ValueError("radius must be non-negative")
    nbrs = g.neighbor_lists
    seen = {v}
    q = deque([(v, 0)])
    while q:
        u, d = q.popleft()
        if d == r:
            continue
        for w in nbrs[u]:
            if w not in seen:
                seen.add(w)
                q.append((w, d + 1))
    return seen
